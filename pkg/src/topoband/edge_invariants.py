"""Edge-side topological indices.

Crossing-counting against a fiducial line realizes the edge Hall index
I = -sum of slope signs of E(k2) - E_F(k2) at its zeros; the chiral
zero-mode count and the Kane-Mele parity reuse the same machinery.  The
band-edge fiducial variant pins E_F just above the lower bulk band,
where every crossing sits next to an incipience point of the edge
branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bulk_invariants import _chiral_blocks
from .edge_spectrum import (
    EdgeBranch,
    _banded_strip,
    _require_singular,
    _window_states,
    band_edges_grid,
)
from .errors import (
    ClassMismatch,
    DidNotConverge,
    MixedChirality,
    OddCount,
    StripTooShort,
    TangentCrossing,
    UnresolvedCrossing,
)
from .models import BulkModel, check_symmetries, gap_report
from .numerics import poly_roots

__all__ = [
    "FiducialLine",
    "Crossing",
    "CrossingSet",
    "find_crossings",
    "signed_crossings",
    "chiral_zero_count",
    "km_edge",
    "crossings_vs_band_edge",
]


@dataclass(frozen=True)
class FiducialLine:
    """Piecewise-linear reference energy E_F(k2), periodic over [0, 2*pi)."""

    k2: np.ndarray
    value: np.ndarray

    @classmethod
    def constant(cls, value: float) -> "FiducialLine":
        return cls(
            k2=np.array([0.0, np.pi]), value=np.array([float(value), float(value)])
        )

    def __call__(self, k2):
        return np.interp(
            np.asarray(k2, dtype=float), self.k2, self.value, period=2.0 * np.pi
        )


@dataclass(frozen=True)
class Crossing:
    k2: float
    branch: int
    slope_sign: int
    side: str


@dataclass(frozen=True)
class CrossingSet:
    crossings: tuple

    def __len__(self) -> int:
        return len(self.crossings)


def find_crossings(branches, fiducial, scale: float) -> CrossingSet:
    """Transversal zeros of E(k2) - E_F(k2) over a list of edge branches.

    Sign changes between adjacent samples are refined by a secant step;
    the slope sign is that of the local linear interpolant.  Assumes at
    most one zero per sample cell.
    """
    found = []
    for bi, br in enumerate(branches):
        k2 = np.asarray(br.k2, dtype=float)
        e = np.asarray(br.energy, dtype=float)
        if br.closed:
            k2 = np.append(k2, k2[0] + 2.0 * np.pi)
            e = np.append(e, e[0])
        if k2.size < 2:
            continue
        g = e - fiducial(np.mod(k2, 2.0 * np.pi))
        if np.any(np.abs(g) < 1e-12 * scale):
            raise UnresolvedCrossing(
                "branch meets the fiducial exactly at a sample node; "
                "displace the fiducial"
            )
        flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
        hits = []
        for i in flips:
            width = k2[i + 1] - k2[i]
            slope = (g[i + 1] - g[i]) / width
            if abs(slope) < 1e-6 * scale:
                raise TangentCrossing(
                    f"crossing slope {slope:.2e} below tolerance near k2 = {k2[i]:.4f}"
                )
            hits.append((k2[i] - g[i] / slope, int(np.sign(slope)), width))
        for (ka, _, wa), (kb, _, wb) in zip(hits, hits[1:]):
            if kb - ka < 0.5 * min(wa, wb):
                raise UnresolvedCrossing(
                    f"two crossings within half a sample cell near k2 = {ka:.4f}"
                )
        found.extend(
            Crossing(
                k2=float(kc % (2.0 * np.pi)), branch=bi, slope_sign=s, side=br.side
            )
            for kc, s, _ in hits
        )
    return CrossingSet(crossings=tuple(found))


def signed_crossings(branches, fiducial, scale: float | None = None) -> int:
    """Edge Hall index: -sum of slope signs over all fiducial crossings.

    Callers restrict `branches` to one side (the boundary at x = 0 is
    "left") before counting.
    """
    if scale is None:
        tops = [np.max(np.abs(b.energy), initial=0.0) for b in branches]
        scale = max([1.0] + tops)
    cs = find_crossings(branches, fiducial, scale)
    return -sum(c.slope_sign for c in cs.crossings)


# ---- chiral zero modes ------------------------------------------------------


_CELL_CAP = 4000


def _max_decay(model: BulkModel) -> float:
    """Slowest zero-mode decay length over both chirality sectors.

    Zero modes of the two sectors decay like roots of t- + t0 z + t+ z^2
    and conj(t+) + conj(t0) z + conj(t-) z^2 inside the unit disk.
    """
    t0, tm, tp = _chiral_blocks(model)
    xi = 1.0
    for coeffs in ((tm, t0, tp), (np.conj(tp), np.conj(t0), np.conj(tm))):
        arr = np.array(coeffs, dtype=complex)
        if np.max(np.abs(arr)) < 1e-30:
            continue
        for r in poly_roots(arr).finite:
            m = abs(r)
            if 1e-300 < m < 1.0 - 1e-12:
                xi = max(xi, -1.0 / np.log(m))
    return xi


def _auto_cells(model: BulkModel) -> int:
    # sized so the residual end-to-end coupling sits far below the
    # zero-energy selection window
    return int(np.clip(np.ceil(25.0 * _max_decay(model)), 60, _CELL_CAP))


def chiral_zero_count(model: BulkModel, n: int | None = None) -> int:
    """Signed count of zero modes on the left end of a half-infinite chain.

    Strip states inside the window |E| <= 1e-8 * scale are collected,
    the chirality operator is diagonalized within their span (the raw
    eigenvectors hybridize the two ends at any finite n), and each
    sharp-chirality state localized at the left end contributes its
    chirality eigenvalue.
    """
    if model.d != 1 or model.n_bands != 2:
        raise ClassMismatch("zero-mode counting is for 1-d two-band models")
    if not check_symmetries(model).chiral:
        raise ClassMismatch("model does not anticommute with the chirality operator")
    gap_report(model)
    scale = max(model.energy_scale, 1e-30)
    if n is None:
        n = _auto_cells(model)
        if n >= _CELL_CAP:
            raise StripTooShort(
                f"zero-mode decay needs ~{int(np.ceil(25 * _max_decay(model)))} cells,"
                f" above the {_CELL_CAP}-cell cap"
            )

    # a state split off zero but far below the gap is a truncated zero
    # mode, not a countable one
    w = 1e-8 * scale
    evals, vecs = _window_states(_banded_strip(model, n), -1e-4 * scale, 1e-4 * scale)
    split = np.abs(evals) > w
    if np.any(split):
        raise StripTooShort(
            f"zero modes split to |E| = {np.max(np.abs(evals[split])):.2e} at n = {n}"
        )
    if evals.size == 0:
        return 0

    pi = np.tile([1.0, -1.0], n)
    mu, c = np.linalg.eigh(vecs.conj().T @ (pi[:, None] * vecs))
    sharp = vecs @ c
    q = int(np.ceil(n / 4))
    total = 0
    for j in range(mu.size):
        if abs(abs(mu[j]) - 1.0) > 1e-6:
            raise MixedChirality(f"zero mode with <Pi> = {mu[j]:.6f}, expected +-1")
        cellw = np.sum(np.abs(sharp[:, j].reshape(n, 2)) ** 2, axis=1)
        wl = float(np.sum(cellw[:q]))
        wr = float(np.sum(cellw[-q:]))
        if wl >= 0.9:
            total += int(np.sign(mu[j]))
        elif wr < 0.9:
            raise StripTooShort(f"zero mode not localized on either end at n = {n}")
    return total


# ---- Kane-Mele parity -------------------------------------------------------


def km_edge(count: int) -> int:
    """Z2 edge index from a Fermi-level crossing count: (|count|/2) mod 2."""
    c = abs(int(count))
    if c % 2:
        raise OddCount(f"crossing count {count} is odd; time reversal requires pairs")
    return (c // 2) % 2


# ---- band-edge fiducial for singular models ---------------------------------


def _singular_lambda_abs(model: BulkModel, k2s: np.ndarray) -> np.ndarray:
    """|lambda*(k2)| = |V_12| / |A_21| for the exact singular edge solution."""
    v = model.v.at(k2s)
    a = model.a.at(k2s)
    a21 = np.abs(a[:, 1, 0])
    v12 = np.abs(v[:, 0, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a21 > 0.0, v12 / np.where(a21 > 0.0, a21, 1.0), np.inf)


def _exist_windows(model: BulkModel, fine: int = 8192):
    """Maximal k2 intervals with |lambda*| < 1 - 1e-8, endpoints bisected."""
    thr = 1.0 - 1e-8
    ks = 2.0 * np.pi * (np.arange(fine) + 0.37) / fine
    lam = _singular_lambda_abs(model, ks)
    exists = lam < thr
    if exists.all():
        return "all"
    if not exists.any():
        return []

    def f(x):
        return float(_singular_lambda_abs(model, np.array([x % (2.0 * np.pi)]))[0]) - thr

    bounds = []
    for i in range(fine):
        j = (i + 1) % fine
        if exists[i] == exists[j]:
            continue
        lo = ks[i]
        hi = ks[i] + 2.0 * np.pi / fine
        flo = f(lo)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if (fm > 0.0) == (flo > 0.0):
                lo, flo = mid, fm
            else:
                hi = mid
        bounds.append(0.5 * (lo + hi))
    bounds.sort()
    windows = []
    for i, s in enumerate(bounds):
        e = bounds[(i + 1) % len(bounds)]
        if e <= s:
            e += 2.0 * np.pi
        mid = 0.5 * (s + e)
        if f(mid) < 0.0:
            windows.append((s, e))
    return windows


def _band_edge_crossings(model: BulkModel, grid: int, k1_grid: int):
    """(value, diagnostics) for the E_l,sup + eps fiducial count."""
    if model.n_bands != 2 or model.d != 2:
        raise ClassMismatch("band-edge fiducial route is for 2-band d=2 models")
    probe = 2.0 * np.pi * (np.arange(64) + 0.37) / 64
    _require_singular(model, probe)
    gap = gap_report(model).min_gap
    eps = 1e-4 * gap

    # converge the k1 resolution until the refined band edge is stable on
    # the scale of the fiducial offset (keeps no band sample above E_F)
    k1g = k1_grid
    prev = band_edges_grid(model, probe, k1_grid=k1g).lower_sup
    while k1g < 16384:
        cur = band_edges_grid(model, probe, k1_grid=2 * k1g).lower_sup
        if np.max(np.abs(cur - prev)) < 0.25 * eps:
            break
        k1g *= 2
        prev = cur
    else:
        raise DidNotConverge(
            "lower band edge did not stabilize below the fiducial offset"
        )

    windows = _exist_windows(model)
    if not windows:  # no edge branch anywhere: nothing can cross
        diagnostics = {
            "eps": eps,
            "k1_grid": k1g,
            "windows": [],
            "window_closed": False,
            "crossings": [],
        }
        return 0, diagnostics
    if windows == "all":
        xs_list = [2.0 * np.pi * (np.arange(grid) + 0.37) / grid]
        closed_flags = [True]
    else:
        xs_list, closed_flags = [], []
        for s, e in windows:
            span = e - s
            tiny = min(1e-7, 1e-3 * span)
            geo = np.geomspace(tiny, 0.5 * span, 40)
            xs = np.unique(
                np.concatenate([s + geo, e - geo, np.linspace(s, e, 130)[1:-1]])
            )
            xs_list.append(xs[(xs > s) & (xs < e)])
            closed_flags.append(False)

    branches = []
    fid_nodes = []
    fid_vals = []
    for xs, closed in zip(xs_list, closed_flags):
        folded = np.mod(xs, 2.0 * np.pi)
        edges = band_edges_grid(model, folded, k1_grid=k1g)
        energy = model.v.at(folded)[:, 1, 1].real
        branches.append(
            EdgeBranch(
                side="left",
                k2=xs,
                energy=energy,
                weight=np.ones(xs.size),
                xi=np.full(xs.size, np.nan),
                closed=closed,
                source="singular",
            )
        )
        fid_nodes.append(folded)
        fid_vals.append(edges.lower_sup + eps)

    order = np.argsort(np.concatenate(fid_nodes))
    nodes = np.concatenate(fid_nodes)[order]
    vals = np.concatenate(fid_vals)[order]
    nodes, uniq = np.unique(nodes, return_index=True)
    fiducial = FiducialLine(k2=nodes, value=vals[uniq])

    scale = model.energy_scale
    crossings = find_crossings(branches, fiducial, scale)
    value = -sum(c.slope_sign for c in crossings.crossings)
    diagnostics = {
        "eps": eps,
        "k1_grid": k1g,
        "windows": [] if windows == "all" else [(float(s), float(e)) for s, e in windows],
        "window_closed": windows == "all",
        "crossings": [(c.k2, c.slope_sign) for c in crossings.crossings],
    }
    return value, diagnostics


def crossings_vs_band_edge(model: BulkModel, grid: int = 4096, k1_grid: int = 1024) -> int:
    """Signed crossing count against E_F(k2) = E_l,sup(k2) + 1e-4 * gap.

    E_l,sup is the k1-supremum of the lower band; the exact singular edge
    branch E(k2) = V_22(k2) is sampled geometrically toward its window
    endpoints so the near-incipience crossings are always resolved.
    """
    value, _ = _band_edge_crossings(model, grid, k1_grid)
    return value
