"""Illustrative plot of a sweep CSV produced by the mecoffload CLI.

Usage: python docs/plot_sweep.py n_sweep.csv out.png [throughput|jfi]
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(path, out, metric="throughput"):
    col = "sum_throughput_bits" if metric == "throughput" else "jfi"
    cells = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["failed"] == "0" and row[col]:
                cells[(row["scheme"], float(row["sweep_value"]))].append(float(row[col]))
    schemes = sorted({k[0] for k in cells})
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in schemes:
        xs = sorted(v for s, v in cells if s == scheme)
        ys = [sum(cells[(scheme, x)]) / len(cells[(scheme, x)]) for x in xs]
        ax.plot(xs, ys, marker="o", label=scheme)
    ax.set_xlabel("sweep value")
    ax.set_ylabel("mean " + ("sum throughput (bits)" if metric == "throughput" else "JFI"))
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2], sys.argv[3] if len(sys.argv) > 3 else "throughput")
