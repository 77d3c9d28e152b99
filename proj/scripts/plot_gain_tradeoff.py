#!/usr/bin/env python3
"""Plot the integral-gain trade-off from an `analyze sweep` table:
iterations to shed 90% of the error on one axis, asymptotic mean-square
error on the other.

Usage: pisync analyze sweep --eta-t 1 --eta-w 1e-6 --out sweep.csv
       plot_gain_tradeoff.py sweep.csv [plot.png]
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.replace(".csv", ".png")

    alpha, iters, var = [], [], []
    with open(path) as f:
        for row in csv.DictReader(f):
            if row["bounded"] != "1" or int(row["iterations_to_90"]) < 0:
                continue
            alpha.append(float(row["alpha"]))
            iters.append(int(row["iterations_to_90"]))
            var.append(float(row["variance_s2"]))

    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot(alpha, iters, marker="o", markersize=3)
    left.set_xlabel("integral gain")
    left.set_ylabel("iterations to 90% decay")
    left.set_yscale("log")
    left.grid(alpha=0.3)
    right.plot(alpha, var, marker="o", markersize=3, color="tab:red")
    right.set_xlabel("integral gain")
    right.set_ylabel("asymptotic mean-square error [s^2]")
    right.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
