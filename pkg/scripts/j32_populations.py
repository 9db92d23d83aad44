"""Population dynamics of the J=3/2 -> J=1/2 coupled-mirror example.

Writes the trajectory as CSV and, when matplotlib is installed, a PNG with
the QHR prediction drawn as horizontal ticks at the right edge.

    python3 scripts/j32_populations.py --out j32.csv --png j32.png
"""

import argparse
import csv

import numpy as np

from msqhr import (
    DetuningSpec,
    PolarizationAmplitudes,
    PulseSpec,
    SimulationProblem,
    TwoLevelLinkage,
    build_linkage,
    coupled_mirrors,
    decompose,
    far_off_phase,
    integrate,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="j32_populations.csv")
    ap.add_argument("--png")
    ap.add_argument("--samples", type=int, default=801)
    ap.add_argument("--rel-tol", type=float, default=1e-10)
    args = ap.parse_args()

    im = build_linkage(TwoLevelLinkage("3/2", "1/2", PolarizationAmplitudes(8.5, 8.5, 8.5)))
    pulse = PulseSpec("sech", 1.0, (-20.0, 20.0))
    c0 = np.zeros(6, dtype=complex)
    c0[0] = 1.0
    tr = integrate(SimulationProblem(im, pulse, DetuningSpec(80.0), c0, args.samples), args.rel_tol)

    ms = decompose(im)
    phis = [far_off_phase(pulse, lam, 80.0) for lam in ms.lambdas]
    predicted = np.abs(coupled_mirrors(ms, phis).U_N[:, 0]) ** 2

    labels = [f"lower[{x}]" for x in im.lower_labels] + [f"upper[{x}]" for x in im.upper_labels]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t/T"] + labels)
        for t, row in zip(tr.times, tr.populations):
            w.writerow([f"{t:.6g}"] + [f"{p:.10g}" for p in row])

    final = tr.populations[-1]
    print("phases     ", np.round(phis, 6).tolist())
    print("numeric    ", np.round(final[:4], 5).tolist(), "upper", f"{final[4:].sum():.2e}")
    print("QHR        ", np.round(predicted, 5).tolist())
    print("max |diff| ", f"{np.max(np.abs(final[:4] - predicted)):.4f}")

    if args.png:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping the figure")
            return
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, lab in enumerate(labels[:4]):
            (line,) = ax.plot(tr.times, tr.populations[:, k], label=f"m = {im.lower_labels[k]}")
            ax.plot([20.5], [predicted[k]], "<", color=line.get_color())
        ax.set_xlabel("t / T")
        ax.set_ylabel("population")
        ax.set_xlim(-20, 21)
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=150)


if __name__ == "__main__":
    main()
