#!/usr/bin/env python3
"""Plot the skew metrics stream of one run.

Usage: plot_metrics.py out/line20/metrics_1.csv [plot.png]
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

    cols = {"time_s": [], "mgs_us": [], "ags_us": [], "mls_us": [], "als_us": []}
    with open(path) as f:
        for row in csv.DictReader(f):
            for key in cols:
                cols[key].append(float(row[key]))

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for key, label in [("mgs_us", "max global"), ("ags_us", "avg global"),
                       ("mls_us", "max local"), ("als_us", "avg local")]:
        ax.plot(cols["time_s"], cols[key], label=label, linewidth=0.9)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("skew [us]")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
