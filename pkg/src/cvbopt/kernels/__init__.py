"""Array kernel backend selection.

Two interchangeable backends provide the hot loops: ``fast`` (a Cython
extension, built at install time) and ``pure`` (plain numpy). The fast
backend is preferred when importable; set ``CVBOPT_KERNELS=pure`` or
``CVBOPT_KERNELS=fast`` in the environment to force one, or call
:func:`use_backend` at runtime. Both backends expose identical
signatures and agree to float rounding.
"""

import os

from . import _pure

try:
    from . import _fast
except ImportError:
    _fast = None

_KERNEL_NAMES = (
    "softmax_rows",
    "softmax_chain",
    "entropy_dense",
    "entropy_weighted_rows",
    "entropy_flat",
    "mog_suffstats",
    "segment_softmax",
    "segment_softmax_chain",
    "lda_accumulate",
    "bincount_weighted",
)

LOG_FLOOR = _pure.LOG_FLOOR

_active = None


def available_backends():
    """Names of the backends importable in this process."""
    return ("fast", "pure") if _fast is not None else ("pure",)


def backend():
    """Name of the backend currently bound to the module-level kernels."""
    return _active


def use_backend(name):
    """Bind the named backend's kernels to this module's namespace."""
    global _active
    if name == "fast":
        if _fast is None:
            raise RuntimeError(
                "fast kernel backend is unavailable (extension not built)"
            )
        mod = _fast
    elif name == "pure":
        mod = _pure
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    for fname in _KERNEL_NAMES:
        globals()[fname] = getattr(mod, fname)
    _active = name
    return name


_requested = os.environ.get("CVBOPT_KERNELS")
if _requested is None:
    use_backend("fast" if _fast is not None else "pure")
else:
    use_backend(_requested)
