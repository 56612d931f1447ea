"""The collapsed-model contract and cross-model evaluators.

Every model exposes the same small surface: a closed-form collapsed
bound, its gradient pair (ordinary in the logits, natural in the
responsibilities), and the mean-field bound evaluated against a frozen
collapsed-factor choice. The free functions here are the dispatch
points used by the optimizer, the tests and the CLI.
"""

from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

import numpy as np

__all__ = [
    "GradientPair",
    "BoundReport",
    "CollapsedModel",
    "bound",
    "gradients",
    "mean_field_bound",
    "directional_curvature",
]


@dataclass(frozen=True)
class GradientPair:
    """Flat gradient of the collapsed bound in both coordinate systems.

    ``ordinary`` is the gradient in the unconstrained logits rho;
    ``natural`` is the gradient in the responsibilities r, which is the
    natural gradient in rho for this family. Both use the state's
    row-major flattening.
    """

    ordinary: np.ndarray
    natural: np.ndarray

    def __post_init__(self):
        ordinary = np.asarray(self.ordinary, dtype=np.float64).reshape(-1)
        natural = np.asarray(self.natural, dtype=np.float64).reshape(-1)
        if ordinary.shape != natural.shape:
            raise ValueError(
                f"gradient length mismatch: ordinary {ordinary.size} "
                f"vs natural {natural.size}"
            )
        if not (np.all(np.isfinite(ordinary)) and np.all(np.isfinite(natural))):
            raise ValueError("gradients must be finite")
        object.__setattr__(self, "ordinary", ordinary)
        object.__setattr__(self, "natural", natural)


@dataclass(frozen=True)
class BoundReport:
    """Collapsed bound next to the mean-field bound it dominates.

    ``kl_gap`` is the exact Jensen gap KL(q*(aux) || q*(state)) between
    the two collapsed-factor choices, so klc = mf + kl_gap holds as an
    identity (enforced within 1e-8 when all fields are present).
    """

    klc: float
    mf: Optional[float] = None
    kl_gap: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "klc", float(self.klc))
        if self.mf is not None:
            object.__setattr__(self, "mf", float(self.mf))
        if self.kl_gap is not None:
            gap = float(self.kl_gap)
            if gap < -1e-9:
                raise ValueError(f"kl_gap must be nonnegative, got {gap}")
            object.__setattr__(self, "kl_gap", max(gap, 0.0))
        if self.mf is not None and self.kl_gap is not None:
            resid = self.klc - self.mf - self.kl_gap
            if abs(resid) > 1e-8:
                raise ValueError(
                    f"klc - mf != kl_gap (residual {resid:.3e} exceeds 1e-8)"
                )


@runtime_checkable
class CollapsedModel(Protocol):
    """Contract every collapsed model implements."""

    def bound(self, state) -> float: ...

    def gradients(self, state) -> GradientPair: ...

    def init_state(self, seed: int): ...


def bound(model, state):
    """Collapsed bound L_KL of the model at the given state."""
    return model.bound(state)


def gradients(model, state):
    """GradientPair of the collapsed bound at the given state."""
    return model.gradients(state)


def mean_field_bound(model, state, aux):
    """Mean-field bound with the collapsed factor frozen at q*(aux).

    Returns a BoundReport carrying klc = bound(state), the mean-field
    value mf, and kl_gap = KL(q*(aux) || q*(state)). klc >= mf always;
    the three are tied by klc = mf + kl_gap.

    Raises
    ------
    NotImplementedError
        If the model does not support the mean-field evaluation.
    """
    fn = getattr(model, "mean_field_bound", None)
    if fn is None:
        raise NotImplementedError(
            f"{type(model).__name__} does not support the mean-field bound"
        )
    return fn(state, aux)


def directional_curvature(model, state, direction, h):
    """Second directional derivatives of L_KL and of the frozen L_MF.

    Both are central second differences along ``direction`` from
    ``state``; the mean-field curve holds the collapsed factor fixed at
    q*(state) while the state moves. ``h`` should lie in [1e-5, 1e-3]
    and ``direction`` should be normalized.
    """
    d = np.asarray(direction, dtype=np.float64).reshape(-1)
    x0 = state.flat
    if d.size != x0.size:
        raise ValueError(f"direction length {d.size} != state size {x0.size}")

    def f_klc(vec):
        return model.bound(state.with_flat(vec))

    def f_mf(vec):
        return model.mean_field_bound(state.with_flat(vec), aux=state).mf

    klc_second = (f_klc(x0 + h * d) - 2.0 * f_klc(x0) + f_klc(x0 - h * d)) / (h * h)
    mf_second = (f_mf(x0 + h * d) - 2.0 * f_mf(x0) + f_mf(x0 - h * d)) / (h * h)
    return klc_second, mf_second
