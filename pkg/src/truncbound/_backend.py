"""Kernel backend selection and the thread cap for data-parallel stages.

The compiled extension is used when importable; ``TRUNCBOUND_BACKEND=python``
forces the numpy fallback.
"""
import os
from concurrent.futures import ThreadPoolExecutor

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("TRUNCBOUND_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    BACKEND = "cython"
else:
    kernels = _pykernels
    BACKEND = "python"

_threads = os.cpu_count() or 1


def set_threads(n):
    """Cap worker threads for data-parallel stages. ``None`` restores the default."""
    global _threads
    if n is None:
        n = os.cpu_count() or 1
    if int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def get_threads():
    return _threads


def row_blocks(n, parts):
    """Split rows ``0..n-2`` of a pair scan into contiguous blocks of similar pair count."""
    total = n * (n - 1) // 2
    if parts <= 1 or n < 3:
        return [(0, max(n - 1, 0))]
    bounds, acc, start = [], 0, 0
    target = total / parts
    for i in range(n - 1):
        acc += n - 1 - i
        if acc >= target * (len(bounds) + 1) and len(bounds) < parts - 1:
            bounds.append((start, i + 1))
            start = i + 1
    bounds.append((start, n - 1))
    return [b for b in bounds if b[0] < b[1]]


def parallel_map(fn, items):
    items = list(items)
    if _threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_threads) as pool:
        return list(pool.map(fn, items))
