"""Time the compiled and numpy edge-chain kernels on the same inputs.

    python benchmarks/bench_kernels.py --n 200 500 --T 30 --repeat 5
"""
import argparse
import timeit

import numpy as np

from lazyier import kernels


def bench(n, T, alpha, repeat):
    rows, cols = np.triu_indices(n)
    p = np.full(rows.size, 5.0 / n)
    backends = ["numpy"] + (["cython"] if kernels.BACKEND == "cython" else [])
    out = {}
    for b in backends:
        fn = lambda: kernels.edge_chain(1, rows, cols, p, p, alpha, T, T, backend=b)  # noqa: E731
        out[b] = min(timeit.repeat(fn, number=1, repeat=repeat))
    if len(backends) == 2:
        assert np.array_equal(kernels.edge_chain(1, rows, cols, p, p, alpha, T, T, backend="numpy"),
                              kernels.edge_chain(1, rows, cols, p, p, alpha, T, T, backend="cython"))
    return rows.size, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[100, 200, 500])
    ap.add_argument("--T", type=int, default=30)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'n':>6} {'pairs':>9} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for n in args.n:
        m, t = bench(n, args.T, args.alpha, args.repeat)
        cy = t.get("cython")
        cy_s = f"{cy:10.4f}" if cy is not None else f"{'n/a':>10}"
        speed = f"{t['numpy'] / cy:8.1f}" if cy else f"{'':>8}"
        print(f"{n:>6} {m:>9} {t['numpy']:10.4f} {cy_s} {speed}")


if __name__ == "__main__":
    main()
