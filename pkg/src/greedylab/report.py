"""Render figures from emitted sweep CSV files.

Figure rendering is downstream of the delimited output: it consumes a sweep
CSV and writes PNG files next to it (or into an explicit directory).
"""

from __future__ import annotations

import csv
import math
from pathlib import Path


def _load_sweep_rows(csv_path: Path) -> list[dict]:
    rows = []
    with open(csv_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "m": int(rec["m"]),
                    "N": int(rec["N"]),
                    "n": int(rec["n"]),
                    "success_fraction": float(rec["success_fraction"]),
                    "mean_ratio": float(rec["mean_ratio"]),
                    "max_ratio": float(rec["max_ratio"]),
                }
            )
    return rows


def render_sweep_figures(csv_path, outdir=None, dpi: int = 150) -> list[str]:
    """Plot success fraction and approximation ratios against sparsity.

    Returns the list of written figure paths; one line per (m, N) shape.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    rows = _load_sweep_rows(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    out = Path(outdir) if outdir is not None else csv_path.parent
    out.mkdir(parents=True, exist_ok=True)

    shapes = sorted({(r["m"], r["N"]) for r in rows})
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for m, n_atoms in shapes:
        pts = [(r["n"], r["success_fraction"]) for r in rows if (r["m"], r["N"]) == (m, n_atoms)]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"m={m}, N={n_atoms}")
    ax.set_xlabel("sparsity n")
    ax.set_ylabel("exact recovery fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    success_path = out / f"{csv_path.stem}_success.png"
    fig.savefig(success_path, dpi=dpi)
    plt.close(fig)
    written.append(str(success_path))

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    plotted = False
    for m, n_atoms in shapes:
        pts = [
            (r["n"], r["mean_ratio"], r["max_ratio"])
            for r in rows
            if (r["m"], r["N"]) == (m, n_atoms) and not math.isnan(r["mean_ratio"])
        ]
        pts.sort()
        if not pts:
            continue
        plotted = True
        xs = [p[0] for p in pts]
        ax.plot(xs, [p[1] for p in pts], marker="o", label=f"mean, m={m}, N={n_atoms}")
        ax.plot(xs, [p[2] for p in pts], marker="x", linestyle="--",
                label=f"max, m={m}, N={n_atoms}")
    ax.set_xlabel("sparsity n")
    ax.set_ylabel("residual / sigma_n")
    ax.grid(True, alpha=0.3)
    if plotted:
        ax.legend(fontsize=8)
    fig.tight_layout()
    ratio_path = out / f"{csv_path.stem}_ratio.png"
    fig.savefig(ratio_path, dpi=dpi)
    plt.close(fig)
    written.append(str(ratio_path))
    return written
