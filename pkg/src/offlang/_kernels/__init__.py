"""Split-search kernels for the boosted-tree trainer.

The exact greedy split scan is the hot inner loop of training; a compiled
Cython version is used when the extension built, with a NumPy fallback
selected at import time. Both backends implement the identical accumulation
order, so they return bitwise-equal results (tests assert this).

Set ``OFFLANG_KERNEL=python`` to force the fallback; ``OFFLANG_KERNEL=cython``
raises if the extension is unavailable. ``benchmarks/bench_split_kernel.py``
compares the two.
"""
import os

from . import _split_py

_requested = os.environ.get("OFFLANG_KERNEL", "auto").lower()

if _requested == "python":
    _impl = _split_py
elif _requested == "cython":
    from . import _split_cy as _impl  # noqa: F401  (ImportError is the contract)
else:
    try:
        from . import _split_cy as _impl
    except ImportError:
        _impl = _split_py

BACKEND = "cython" if _impl is not _split_py else "python"

best_split_node = _impl.best_split_node
