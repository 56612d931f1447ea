"""Compare the compiled kernel backend against the pure-NumPy fallback.

Times every kernel on synthetic inputs at a few sizes and prints a
table with the speedup of the compiled extension. Run directly:

    python3 benchmarks/bench_kernels.py --repeats 30
"""

import argparse
import timeit

import numpy as np

from cvbopt import kernels
from cvbopt.kernels import available_backends, use_backend


def build_inputs(n, k, seed=0):
    rng = np.random.default_rng(seed)
    rho = rng.standard_normal((n, k))
    r = np.exp(rho - rho.max(axis=1, keepdims=True))
    r /= r.sum(axis=1, keepdims=True)
    g = rng.standard_normal((n, k))
    y = rng.standard_normal((n, 3))
    w = rng.integers(1, 6, size=n).astype(np.float64)
    sizes = rng.integers(1, 5, size=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(sizes, out=indptr[1:])
    nnz = int(indptr[-1])
    flat_rho = rng.standard_normal(nnz)
    flat_r = kernels.segment_softmax(flat_rho, indptr)
    flat_g = rng.standard_normal(nnz)
    cols = rng.integers(0, k, size=nnz)
    doc_ids = rng.integers(0, max(n // 10, 1), size=n)
    word_ids = rng.integers(0, 50, size=n)
    return {
        "softmax_rows": (rho,),
        "softmax_chain": (r, g),
        "entropy_dense": (r,),
        "entropy_weighted_rows": (r, w),
        "entropy_flat": (flat_r,),
        "mog_suffstats": (y, r),
        "segment_softmax": (flat_rho, indptr),
        "segment_softmax_chain": (flat_r, flat_g, indptr),
        "lda_accumulate": (r, w, doc_ids, word_ids, max(n // 10, 1), 50, 0.1, 0.1),
        "bincount_weighted": (cols, flat_r, k),
    }


def time_kernel(name, args, repeats):
    fn = getattr(kernels, name)
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeats))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--cols", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    backends = available_backends()
    if "fast" not in backends:
        print("compiled backend unavailable; nothing to compare")
        return

    inputs = build_inputs(args.rows, args.cols)
    print(f"rows={args.rows} cols={args.cols} repeats={args.repeats}")
    print(f"{'kernel':<24}{'pure (ms)':>12}{'fast (ms)':>12}{'speedup':>10}")
    for name, call_args in inputs.items():
        times = {}
        for backend in ("pure", "fast"):
            use_backend(backend)
            times[backend] = time_kernel(name, call_args, args.repeats)
        ratio = times["pure"] / times["fast"] if times["fast"] > 0 else float("inf")
        print(
            f"{name:<24}{1e3 * times['pure']:>12.3f}"
            f"{1e3 * times['fast']:>12.3f}{ratio:>9.2f}x"
        )
    use_backend("fast")


if __name__ == "__main__":
    main()
