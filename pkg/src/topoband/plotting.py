"""File-output figure rendering for edge spectra and parameter sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["save_edge_figure", "save_sweep_figure"]

_SIDE_COLOR = {"left": "tab:blue", "right": "tab:red"}


def save_edge_figure(path, branches, fermi: float | None = None) -> None:
    """Strip spectrum: shaded bulk continua, edge branches colored by side."""
    be = branches.band_edges
    lo = float(np.min(be.lower_sup))
    hi = float(np.max(be.upper_inf))
    pad = 0.35 * max(hi - lo, 1e-3)
    ymin, ymax = lo - pad, hi + pad

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    ax.fill_between(be.k2, ymin, be.lower_sup, color="0.75", lw=0, alpha=0.8,
                    label="bulk bands")
    ax.fill_between(be.k2, be.upper_inf, ymax, color="0.75", lw=0, alpha=0.8)
    seen = set()
    for br in branches.branches:
        label = None
        if br.side not in seen:
            seen.add(br.side)
            label = f"{br.side} edge"
        ax.scatter(np.mod(br.k2, 2.0 * np.pi), br.energy, s=4,
                   color=_SIDE_COLOR.get(br.side, "tab:green"), label=label)
    if fermi is not None:
        ax.axhline(fermi, color="k", lw=0.8, ls="--", label="$E_F$")
    ax.set_xlim(0.0, 2.0 * np.pi)
    ax.set_ylim(ymin, ymax)
    ax.set_xlabel("$k_2$")
    ax.set_ylabel("$E$")
    ax.set_title(f"strip spectrum, n = {branches.n_cells} cells")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(path, rows) -> None:
    """Bulk vs edge index across the sweep; non-ok rows marked on the axis."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ps_bulk, vs_bulk, ps_edge, vs_edge = [], [], [], []
    for row in rows:
        if row.report is None:
            continue
        for v in row.report.bulk.values():
            ps_bulk.append(row.parameter)
            vs_bulk.append(v)
        for v in row.report.edge.values():
            ps_edge.append(row.parameter)
            vs_edge.append(v)
    ax.plot(ps_bulk, vs_bulk, "o", ms=7, mfc="none", color="tab:blue", label="bulk")
    ax.plot(ps_edge, vs_edge, "x", ms=6, color="tab:red", label="edge")
    bad = [row.parameter for row in rows if row.report is None]
    for i, p in enumerate(bad):
        ax.axvline(p, color="0.6", ls=":", lw=1.0,
                   label="skipped (gapless/error)" if i == 0 else None)
    ax.set_xlabel("parameter")
    ax.set_ylabel("index")
    ax.set_title("bulk vs edge index")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
