"""Model front-ends for the collapsed bound."""

from .lda import (
    Corpus,
    LdaModel,
    LdaPosterior,
    LdaPriors,
    lda_bound,
    lda_gradient,
    lda_posterior,
    lda_topics,
)
from .quant import (
    AlignmentMatrix,
    QuantModel,
    QuantPrior,
    quant_bound,
    quant_gradient,
    quant_posterior_theta,
)
from .mog import (
    MogData,
    MogModel,
    MogPosterior,
    MogPriors,
    default_mog_priors,
    mog_bound,
    mog_gradient,
    mog_posterior,
    mog_stats,
)

__all__ = [
    "AlignmentMatrix",
    "QuantModel",
    "QuantPrior",
    "quant_bound",
    "quant_gradient",
    "quant_posterior_theta",
    "Corpus",
    "LdaModel",
    "LdaPosterior",
    "LdaPriors",
    "lda_bound",
    "lda_gradient",
    "lda_posterior",
    "lda_topics",
    "MogData",
    "MogModel",
    "MogPosterior",
    "MogPriors",
    "default_mog_priors",
    "mog_bound",
    "mog_gradient",
    "mog_posterior",
    "mog_stats",
]
