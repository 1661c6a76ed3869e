#!/usr/bin/env python3
"""Plot the CSVs written by `holoris`.

Usage: plot.py CSV [CSV ...]   (writes CSV-name.png next to each input)

Pattern grids (psi_azi_norm,psi_ele_norm,magnitude,phase) become heat maps
in dB; sweeps become one line per series with 95% error bars. Needs
matplotlib and numpy.
"""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(line for line in f if not line.startswith("#")))
    return rows[0], rows[1:]


def plot_pattern(rows, ax):
    a = np.array([[float(v) for v in r[:3]] for r in rows])
    n = int(round(np.sqrt(len(a))))
    mag = a[:, 2].reshape(n, n).T
    db = 20 * np.log10(np.maximum(mag, 1e-6))
    im = ax.imshow(db, origin="lower", extent=[-1, 1, -1, 1], vmin=-40, vmax=0, cmap="viridis")
    ax.set_xlabel("azimuth (normalized)")
    ax.set_ylabel("elevation (normalized)")
    plt.colorbar(im, ax=ax, label="|g| (dB)")


def plot_sweep(header, rows, ax):
    x_col, y_col, ci_col = (1, 3, 4) if header[1] == "ptx_dbm" else (1, 2, 3)
    series = defaultdict(list)
    for r in rows:
        series[r[0]].append((float(r[x_col]), float(r[y_col]), float(r[ci_col])))
    for name, pts in series.items():
        x, y, ci = map(np.array, zip(*sorted(pts)))
        ax.errorbar(x, y, yerr=np.where(np.isfinite(ci), ci, 0), marker="o", capsize=2, label=name)
    ax.set_xlabel(header[x_col])
    ax.set_ylabel(header[y_col] if header[1] == "ptx_dbm" else "metric")
    ax.grid(True, alpha=0.3)
    ax.legend()


def main(paths):
    for p in map(Path, paths):
        header, rows = read(p)
        fig, ax = plt.subplots(figsize=(6, 4.5))
        if header[0] == "psi_azi_norm":
            plot_pattern(rows, ax)
        else:
            plot_sweep(header, rows, ax)
        ax.set_title(p.stem)
        fig.tight_layout()
        fig.savefig(p.with_suffix(".png"), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1:])
