"""Multi-restart benchmark harness and the iterations-to-best metric.

A restart succeeds when its final bound lands within ``threshold_nats``
of the best bound any method found in the same benchmark. The metric
charges every restart's iterations to the denominator but only counts
successes, so methods that waste restarts in poor optima pay for them.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .optimize import OptimizerConfig, run

__all__ = [
    "METHOD_CODES",
    "MethodSummary",
    "BenchmarkSummary",
    "optimizer_config",
    "iterations_to_best",
    "run_benchmark",
]

# short method codes used by the CLI and the benchmark tables
METHOD_CODES = {
    "vbem": ("vbem", "fletcher_reeves"),
    "fr": ("ncg", "fletcher_reeves"),
    "pr": ("ncg", "polack_ribiere"),
    "hs": ("ncg", "hestenes_stiefel"),
}


def optimizer_config(code, tol=1e-6, max_iter=5000):
    """OptimizerConfig for a short method code (vbem, fr, pr, hs)."""
    if code not in METHOD_CODES:
        raise ValueError(
            f"method must be one of {sorted(METHOD_CODES)}, got {code!r}"
        )
    method, rule = METHOD_CODES[code]
    return OptimizerConfig(method=method, beta_rule=rule, tol=tol, max_iter=max_iter)


@dataclass(frozen=True)
class MethodSummary:
    """One method's row of a benchmark.

    ``iterations_to_best`` is total iterations over all restarts
    divided by the success count; infinite when nothing succeeded.
    """

    restarts: int
    successes: int
    total_iterations: int
    iterations_to_best: float
    best_bound: float
    final_bounds: tuple
    iteration_counts: tuple

    def to_dict(self):
        all_failed = self.successes == 0
        return {
            "restarts": self.restarts,
            "successes": self.successes,
            "total_iterations": self.total_iterations,
            "iterations_to_best": None if all_failed else self.iterations_to_best,
            "all_failed": all_failed,
            "best_bound": self.best_bound,
            "final_bounds": list(self.final_bounds),
            "iteration_counts": list(self.iteration_counts),
        }


def iterations_to_best(traces, final_bounds, threshold_nats, best_bound=None):
    """Score one method's restarts against the best-known optimum.

    ``best_bound`` is the optimum the successes are measured against;
    it defaults to the best of the given restarts but a benchmark
    passes the maximum across every method it ran.
    """
    if not traces or len(traces) != len(final_bounds):
        raise ValueError("traces and final_bounds must be non-empty and equal length")
    if not threshold_nats > 0.0:
        raise ValueError("threshold_nats must be > 0")
    finals = [float(b) for b in final_bounds]
    counts = [t.n_iter if hasattr(t, "n_iter") else int(t) for t in traces]
    best = max(finals) if best_bound is None else float(best_bound)
    successes = sum(1 for b in finals if b >= best - threshold_nats)
    total = int(sum(counts))
    avg = total / successes if successes else float("inf")
    return MethodSummary(
        restarts=len(finals),
        successes=successes,
        total_iterations=total,
        iterations_to_best=avg,
        best_bound=max(finals),
        final_bounds=tuple(finals),
        iteration_counts=tuple(counts),
    )


@dataclass(frozen=True)
class BenchmarkSummary:
    """All methods' rows plus the shared best-known optimum."""

    threshold_nats: float
    restarts: int
    best_bound: float
    methods: dict

    def to_dict(self):
        return {
            "threshold_nats": self.threshold_nats,
            "restarts": self.restarts,
            "best_bound": self.best_bound,
            "methods": {code: row.to_dict() for code, row in self.methods.items()},
        }


def _run_one(model, seed, config):
    state = model.init_state(seed)
    final, trace = run(model, state, config)
    return final, trace


def run_benchmark(
    model,
    methods,
    restarts,
    threshold_nats=10.0,
    tol=1e-6,
    max_iter=5000,
    base_seed=0,
    workers=1,
):
    """Run every method from the same pool of restart seeds.

    Restart i of every method starts from init_state(base_seed + i),
    so methods compete from identical initializations. Results merge in
    seed order regardless of worker count. Returns the summary and the
    per-method traces.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    configs = {code: optimizer_config(code, tol, max_iter) for code in methods}
    seeds = [base_seed + i for i in range(restarts)]
    all_traces = {}
    finals = {}
    for code, config in configs.items():
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(
                    pool.map(lambda s: _run_one(model, s, config), seeds)
                )
        else:
            results = [_run_one(model, seed, config) for seed in seeds]
        all_traces[code] = [trace for _, trace in results]
        finals[code] = [trace.final_bound for trace in all_traces[code]]
    best = max(max(v) for v in finals.values())
    rows = {
        code: iterations_to_best(
            all_traces[code], finals[code], threshold_nats, best_bound=best
        )
        for code in configs
    }
    summary = BenchmarkSummary(
        threshold_nats=float(threshold_nats),
        restarts=restarts,
        best_bound=float(best),
        methods=rows,
    )
    return summary, all_traces
