"""Compare the compiled and numpy RK4 kernels.

Usage: python benchmarks/bench_kernels.py [--steps 200] [--cutoffs 30 75]

The cutoffs default to the automatic choice for alpha = 2 and alpha = 5.
"""
import argparse
import time

import numpy as np

from rydbec import _pykernels

try:
    from rydbec import _ckernels
except ImportError:
    _ckernels = None


def _state(nb, seed=0):
    rng = np.random.default_rng(seed)
    d = 4 * nb
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real, rng.normal(size=d)


def time_backend(mod, nb, steps, repeats=3):
    rho0, e = _state(nb)
    best = float("inf")
    for _ in range(repeats):
        rho = rho0.copy()
        t0 = time.perf_counter()
        mod.rk4_steps(rho, e, nb, 0.02, 1e-3, steps)
        best = min(best, time.perf_counter() - t0)
    return best / steps, rho


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[30, 75])
    args = ap.parse_args()
    print(f"{'N':>4} {'dim':>5} {'numpy ms/step':>14} {'cython ms/step':>15} {'speedup':>8} {'max diff':>9}")
    for n in args.cutoffs:
        nb = n + 1
        tp, rp = time_backend(_pykernels, nb, args.steps)
        if _ckernels is None:
            print(f"{n:>4} {4 * nb:>5} {tp * 1e3:>14.3f} {'n/a':>15}")
            continue
        tc, rc = time_backend(_ckernels, nb, args.steps)
        print(f"{n:>4} {4 * nb:>5} {tp * 1e3:>14.3f} {tc * 1e3:>15.3f} {tp / tc:>7.2f}x {np.max(np.abs(rp - rc)):>9.1e}")


if __name__ == "__main__":
    main()
