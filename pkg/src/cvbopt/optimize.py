"""Optimizers over the collapsed bound.

Two methods share one geometry: VBEM takes unit steps along the natural
gradient (equivalent to the classical coordinate ascent), and Riemannian
nonlinear conjugate gradients mixes the same steps with a conjugate
direction under one of three beta rules. Inner products on the
responsibility manifold never materialize the metric: pairing a
natural-side vector with an ordinary-side vector gives the Riemannian
dot product directly.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import gradients as model_gradients

__all__ = [
    "OptimizerConfig",
    "TraceRecord",
    "Trace",
    "NcgMemory",
    "riemannian_inner",
    "compute_beta",
    "vbem_step",
    "ncg_step",
    "run",
]

METHODS = ("vbem", "ncg")
BETA_RULES = ("fletcher_reeves", "polack_ribiere", "hestenes_stiefel")

# an accepted step may lose at most this much bound to rounding
DECREASE_SLACK = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    """Method selection and stopping rule.

    The run stops when the bound change or the Riemannian gradient norm
    falls below ``tol`` (whichever first), or after ``max_iter``
    iterations. ``beta_rule`` only matters for method "ncg".
    """

    method: str = "vbem"
    beta_rule: str = "fletcher_reeves"
    tol: float = 1e-6
    max_iter: int = 5000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.beta_rule not in BETA_RULES:
            raise ValueError(
                f"beta_rule must be one of {BETA_RULES}, got {self.beta_rule!r}"
            )
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    """One optimizer iteration.

    ``grad_norm`` is the Riemannian norm at the iteration's starting
    state; ``beta`` is the conjugation weight actually used while
    ``beta_raw`` keeps the pre-clamp value; ``accepted`` is False when
    the conjugate candidate was rejected and the step fell back to the
    pure natural gradient; ``elapsed_ms`` is cumulative wall time.
    """

    iteration: int
    bound: float
    grad_norm: float
    beta: float
    beta_raw: float
    accepted: bool
    elapsed_ms: float

    def __post_init__(self):
        for name in ("bound", "grad_norm", "beta", "beta_raw", "elapsed_ms"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass(frozen=True)
class Trace:
    """Full iteration history of one run."""

    records: tuple
    converged: bool
    reason: str

    @property
    def n_iter(self):
        return len(self.records)

    @property
    def final_bound(self):
        return self.records[-1].bound

    def bounds(self):
        return np.array([rec.bound for rec in self.records])

    def write_csv(self, path):
        """Write the per-iteration trace.

        Columns: iter,bound,grad_norm,beta,accepted,elapsed_ms.
        """
        with open(path, "w") as fh:
            fh.write("iter,bound,grad_norm,beta,accepted,elapsed_ms\n")
            for rec in self.records:
                fh.write(
                    f"{rec.iteration},{rec.bound!r},{rec.grad_norm!r},"
                    f"{rec.beta!r},{int(rec.accepted)},{rec.elapsed_ms:.3f}\n"
                )


@dataclass(frozen=True)
class NcgMemory:
    """State carried between conjugate-gradient iterations."""

    natural: np.ndarray
    ordinary: np.ndarray
    direction: np.ndarray
    bound: float


def riemannian_inner(a_natural, b_ordinary):
    """Riemannian inner product as a plain dot product.

    Pairing a natural-side vector with an ordinary-side vector folds
    the metric in implicitly: <a, b>_G = a . b.
    """
    a = np.asarray(a_natural, dtype=np.float64).reshape(-1)
    b = np.asarray(b_ordinary, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return float(a @ b)


def _beta_raw(rule, g_nat, g_ord, g_nat_prev, g_ord_prev):
    if rule == "fletcher_reeves":
        num = riemannian_inner(g_nat, g_ord)
        den = riemannian_inner(g_nat_prev, g_ord_prev)
    else:
        diff = g_nat - g_nat_prev
        num = riemannian_inner(diff, g_ord)
        if rule == "polack_ribiere":
            den = riemannian_inner(g_nat_prev, g_ord_prev)
        else:
            den = riemannian_inner(diff, g_ord_prev)
    if den == 0.0:
        return 0.0
    return num / den


def compute_beta(rule, g_nat, g_ord, g_nat_prev, g_ord_prev):
    """Conjugation weight for the chosen rule, clamped at zero.

    A zero denominator or negative raw value restarts the conjugation
    (beta = 0).
    """
    if rule not in BETA_RULES:
        raise ValueError(f"beta_rule must be one of {BETA_RULES}, got {rule!r}")
    return max(_beta_raw(rule, g_nat, g_ord, g_nat_prev, g_ord_prev), 0.0)


def vbem_step(model, state):
    """One unit step along the natural gradient.

    Equivalent to the classical mean-field VB-E coordinate update for
    every model in this package. The bound cannot decrease; a decrease
    beyond rounding slack signals a broken model gradient and raises.
    """
    before = model.bound(state)
    gp = model_gradients(model, state)
    stepped = state.with_flat(state.flat + gp.natural)
    after = model.bound(stepped)
    if after < before - DECREASE_SLACK:
        raise RuntimeError(
            f"vbem step decreased the bound by {before - after:.3e}; "
            "the model's natural gradient is inconsistent with its bound"
        )
    return stepped


def ncg_step(model, state, memory=None, beta_rule="fletcher_reeves"):
    """One conjugate step; returns the new state and updated memory.

    The direction is g_nat + beta * previous direction. A candidate
    that lowers the bound (or leaves it non-finite) is rejected in
    favor of the beta = 0 natural-gradient step. ``memory=None`` means
    a fresh start, which is exactly a VBEM step.
    """
    if beta_rule not in BETA_RULES:
        raise ValueError(f"beta_rule must be one of {BETA_RULES}, got {beta_rule!r}")
    new_state, mem, _ = _ncg_advance(model, state, memory, beta_rule)
    return new_state, mem


def _ncg_advance(model, state, memory, rule):
    before = model.bound(state) if memory is None else memory.bound
    gp = model_gradients(model, state)
    if memory is None:
        beta_raw = 0.0
    else:
        beta_raw = _beta_raw(
            rule, gp.natural, gp.ordinary, memory.natural, memory.ordinary
        )
    beta = max(beta_raw, 0.0)
    accepted = True
    direction = gp.natural + beta * memory.direction if beta > 0.0 else gp.natural
    candidate = state.with_flat(state.flat + direction)
    after = model.bound(candidate)
    if not np.isfinite(after) or after < before:
        # conjugation overshot: restart with the safe natural step
        beta = 0.0
        accepted = False
        direction = gp.natural
        candidate = state.with_flat(state.flat + direction)
        after = model.bound(candidate)
        if not np.isfinite(after) or after < before - DECREASE_SLACK:
            raise RuntimeError(
                f"natural-gradient fallback decreased the bound by "
                f"{before - after:.3e}; the model's gradient is inconsistent"
            )
    memory = NcgMemory(
        natural=gp.natural, ordinary=gp.ordinary, direction=direction, bound=after
    )
    return candidate, memory, (gp, beta, beta_raw, accepted, after, before)


def run(model, init_state, config):
    """Iterate the configured method from an initial state.

    Returns (final_state, Trace). Stops when |delta bound| < tol, when
    the Riemannian gradient norm drops below tol, or at max_iter (the
    trace's ``converged``/``reason`` fields say which).
    """
    state = init_state
    before = model.bound(state)
    memory = None
    records = []
    reason = "max_iter"
    converged = False
    start = time.perf_counter()
    for i in range(config.max_iter):
        if config.method == "vbem":
            gp = model_gradients(model, state)
            candidate = state.with_flat(state.flat + gp.natural)
            after = model.bound(candidate)
            if after < before - DECREASE_SLACK:
                raise RuntimeError(
                    f"vbem step decreased the bound by {before - after:.3e}; "
                    "the model's natural gradient is inconsistent with its bound"
                )
            beta = beta_raw = 0.0
            accepted = True
        else:
            candidate, memory, info = _ncg_advance(
                model, state, memory, config.beta_rule
            )
            gp, beta, beta_raw, accepted, after, before = info
        gnorm = np.sqrt(max(riemannian_inner(gp.natural, gp.ordinary), 0.0))
        records.append(
            TraceRecord(
                iteration=i,
                bound=after,
                grad_norm=gnorm,
                beta=beta,
                beta_raw=beta_raw,
                accepted=accepted,
                elapsed_ms=1000.0 * (time.perf_counter() - start),
            )
        )
        delta = abs(after - before)
        state = candidate
        before = after
        if delta < config.tol:
            reason = "delta_bound"
            converged = True
            break
        if gnorm < config.tol:
            reason = "grad_norm"
            converged = True
            break
    return state, Trace(records=tuple(records), converged=converged, reason=reason)
