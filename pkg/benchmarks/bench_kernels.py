"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from truncbound._backend import compiled_kernels, python_kernels


def _substochastic(rng, n):
    M = rng.random((n, n)) * (rng.random((n, n)) < 0.3)
    M /= M.sum(axis=1, keepdims=True) + 1e-300
    M *= rng.uniform(0.5, 0.99, size=(n, 1))
    return M


def _cases(rng, n):
    G = _substochastic(rng, n)
    d = 1.0 - G.sum(axis=1)
    nu = rng.dirichlet(np.ones(n), size=n)
    return {
        "gth_eliminate": lambda k: k.gth_eliminate(G.copy(), d.copy(), n),
        "fundamental": lambda k: k.fundamental(G, d),
        "tv_scan": lambda k: k.tv_scan(nu, 0, n),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if compiled_kernels is None:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'n':>6}{'compiled [ms]':>16}{'python [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, fn in _cases(rng, n).items():
            t = {}
            for label, mod in (("c", compiled_kernels), ("py", python_kernels)):
                t[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<15}{n:>6}{t['c']:>16.3f}{t['py']:>14.3f}{t['py'] / t['c']:>10.1f}")


if __name__ == "__main__":
    main()
