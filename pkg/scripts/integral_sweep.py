"""Evaluate the Whittaker integral over a range of x with both refinement
policies and print a CSV table (x, trapezoid, gauss, difference, seconds).

    python3 scripts/integral_sweep.py --m 1 --n 3 --x-min -2 --x-max 2 --steps 9
"""

import argparse
import csv
import sys
import time

import numpy as np

from grwhittaker.integral import POLICIES, evaluate_whittaker


def main() -> None:
    ap = argparse.ArgumentParser(description="x-sweep of the Whittaker integral")
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--lambda", dest="lam", default=None, help="comma-separated, length n")
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--x-min", type=float, default=-2.0)
    ap.add_argument("--x-max", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=9)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()
    lam = [float(v) for v in args.lam.split(",")] if args.lam else [0.0] * args.n
    w = csv.writer(sys.stdout)
    w.writerow(["x", "re_trapezoid", "im_trapezoid", "re_gauss", "im_gauss", "difference", "seconds"])
    for x in np.linspace(args.x_min, args.x_max, args.steps):
        t0 = time.perf_counter()
        vals = {p: evaluate_whittaker(args.m, args.n, lam, args.hbar, float(x), args.tol, p).value for p in POLICIES}
        t, g = vals["trapezoid"], vals["gauss"]
        w.writerow([f"{x:.4f}", repr(t.real), repr(t.imag), repr(g.real), repr(g.imag), f"{abs(t - g):.2e}", f"{time.perf_counter() - t0:.2f}"])


if __name__ == "__main__":
    main()
