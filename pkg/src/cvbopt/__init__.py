"""Collapsed variational bounds for conjugate-exponential models.

The package implements the KL-corrected (collapsed) variational bound
for three conjugate-exponential models (Bayesian mixture of Gaussians,
latent Dirichlet allocation, multinomial transcript quantification),
optimized by unit-step natural-gradient ascent (VBEM) or Riemannian
nonlinear conjugate gradients.
"""

__version__ = "0.1.0"

from . import bench, cli, core, data, expfam, graph, kernels, models, optimize, rng  # noqa: F401
