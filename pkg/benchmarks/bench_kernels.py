"""Compare the compiled and NumPy backends of the Volterra sweep.

Usage: python benchmarks/bench_kernels.py [--h 0.02 0.01] [--repeat 3]
"""

import argparse
import time

import numpy as np

from halfline import _kernels_py, kernels
from halfline.forward import _half_grid
from halfline.numerics import tail_integral
from halfline.potential import polynomial_bump


def _setup(h: float):
    p = polynomial_bump(h=h)
    qh = _half_grid(p.values)
    delta = 0.5 * h
    tail = tail_integral(qh, delta, rule="trapezoid")
    M = qh.size - 1
    B = np.tril(np.broadcast_to(0.5 * tail[:, None], (M + 1, M + 1))).copy()
    return B, qh, tail, delta


def _time(fn, B0, qh, tail, delta, repeat: int) -> tuple[float, np.ndarray]:
    best = np.inf
    for _ in range(repeat):
        B = B0.copy()
        t = time.perf_counter()
        fn(B, qh, tail, delta)
        best = min(best, time.perf_counter() - t)
    return best, B


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "compiled":
        print("compiled extension not available; only the NumPy backend is timed")
    print(f"{'h':>6} {'grid':>6} {'numpy [s]':>10} {'compiled [s]':>13} {'speedup':>8} {'max diff':>9}")
    for h in args.h:
        B0, qh, tail, delta = _setup(h)
        t_py, B_py = _time(_kernels_py.volterra_sweep, B0, qh, tail, delta, args.repeat)
        if kernels.BACKEND == "compiled":
            t_c, B_c = _time(kernels.volterra_sweep, B0, qh, tail, delta, args.repeat)
            diff = float(np.max(np.abs(B_c - B_py)))
            print(f"{h:6.3g} {B0.shape[0]:6d} {t_py:10.4f} {t_c:13.4f} {t_py / t_c:8.1f} {diff:9.2e}")
        else:
            print(f"{h:6.3g} {B0.shape[0]:6d} {t_py:10.4f} {'-':>13} {'-':>8} {'-':>9}")


if __name__ == "__main__":
    main()
