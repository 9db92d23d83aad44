"""Rosen-Zener formula against direct integration over a (lambda T, Delta T) grid.

Prints the largest propagator-entry deviation per row of the grid.

    python3 scripts/rz_exactness_sweep.py --n 7
"""

import argparse

import numpy as np

from msqhr import DetuningSpec, PulseSpec, propagator, rosen_zener_ck

WINDOW = (-40.0, 40.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7, help="grid points per axis")
    ap.add_argument("--rel-tol", type=float, default=1e-10)
    args = ap.parse_args()

    pulse = PulseSpec("sech", 1.0, WINDOW)
    lams = np.linspace(0.0, 3.0, args.n)
    deltas = np.linspace(-5.0, 5.0, args.n)
    worst = 0.0
    print("lambda T   max deviation over Delta T in [-5, 5]")
    for lam in lams:
        row = 0.0
        for D in deltas:
            u = propagator(np.array([[lam]]), pulse, DetuningSpec(D), args.rel_tol)
            row = max(row, np.max(np.abs(u - rosen_zener_ck(lam, D, WINDOW).matrix())))
        worst = max(worst, row)
        print(f"{lam:8.3f}   {row:.2e}")
    print(f"overall    {worst:.2e}")


if __name__ == "__main__":
    main()
