"""Edge spectra of half-plane (strip) Hamiltonians, by three routes.

1. Dirichlet strip diagonalization: truncate to n cells, diagonalize per
   k2, keep in-gap states localized on one side, track them into
   branches.  Fully general, costs an eigh per k2 node.
2. Complex-momentum continuation for Dirac models: the edge energies are
   +-||b0_perp(k2)|| with the sign (for N=2) fixed by the frame
   orientation tau; existence is origin enclosure by the hopping
   ellipse.  Exact, O(1) per k2.
3. Singular hopping (second column of A zero): the boundary condition
   degenerates and a single Bloch exponential solves the half-line
   problem exactly, giving E(k2) = V_22(k2) whenever the root
   lambda* = -V_12 / conj(A_21) lies inside the unit disk.

Sites are x = 0..n-1 with the boundary at x = 0 ("left"); the hopping
block A connects x to x+1 via H[x+1, x] = A.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.linalg import eig_banded, solve_banded
from scipy.sparse.linalg import ArpackError
from scipy.sparse.linalg import eigsh as sparse_eigsh

from . import ellipse
from .clifford import dirac_decompose
from .errors import (
    ClassMismatch,
    DegenerateJacobian,
    MalformedModel,
    MethodDisagreement,
    NotSingularHopping,
    StripTooShort,
    TrackingAmbiguity,
    ZeroHopping,
)
from .models import BulkModel, bloch_grid, gap_report
from .numerics import poly_roots

__all__ = [
    "StripMatrix",
    "build_strip",
    "BandEdges",
    "band_edges_grid",
    "band_edges_at_k2",
    "EdgeBranch",
    "EdgeBranches",
    "strip_edge_branches",
    "LambdaRoots",
    "edge_lambda_roots",
    "EdgeStateInfo",
    "dirac_edge_states",
    "analytic_branches",
    "singular_edge_branches",
    "IncipiencePoint",
    "incipience_points_singular",
]

CIRCLE_BAND = 1e-8  # |lambda| within this of 1 counts as non-decaying


# ---- strip construction -----------------------------------------------------


@dataclass(frozen=True)
class StripMatrix:
    n_cells: int
    k2: float
    matrix: np.ndarray


def build_strip(model: BulkModel, n: int, k2: float = 0.0) -> StripMatrix:
    """Dirichlet truncation to n cells; n=1 degenerates to V(k2)."""
    if n < 1:
        raise MalformedModel(f"strip needs n >= 1 cells, got {n}")
    nb = model.n_bands
    v = model.v(k2)
    a = model.a(k2)
    h = np.zeros((n * nb, n * nb), dtype=complex)
    for x in range(n):
        h[x * nb : (x + 1) * nb, x * nb : (x + 1) * nb] = v
    for x in range(n - 1):
        h[(x + 1) * nb : (x + 2) * nb, x * nb : (x + 1) * nb] = a
        h[x * nb : (x + 1) * nb, (x + 1) * nb : (x + 2) * nb] = a.conj().T
    return StripMatrix(n_cells=n, k2=float(k2), matrix=h)


def _banded_strip(model: BulkModel, n: int, k2: float = 0.0) -> np.ndarray:
    """Lower-banded storage of the n-cell strip: band[i, j] = H[j+i, j].

    The strip is block tridiagonal, so the bandwidth is 2N - 1 and the
    banded eigensolver costs O(n^2) per in-gap state instead of O(n^3)
    for the dense factorization.
    """
    nb = model.n_bands
    v = model.v(k2)
    a = model.a(k2)
    band = np.zeros((2 * nb, n * nb), dtype=complex)
    for r in range(nb):
        for c in range(nb):
            if r >= c:
                band[r - c, c::nb] = v[r, c]
            band[nb + r - c, c::nb][: n - 1] = a[r, c]
    return band


def _band_to_sparse(band: np.ndarray):
    dim = band.shape[1]
    low = sparse.diags(
        [band[r, : dim - r] for r in range(band.shape[0])],
        offsets=[-r for r in range(band.shape[0])],
        format="csc",
    )
    return (low + low.conj().T.tocsc() - sparse.diags(band[0].real)).tocsc()


def _band_matvec(band: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = band[0].real * x
    for r in range(1, band.shape[0]):
        d = band[r, : band.shape[1] - r]
        y[r:] += d * x[:-r]
        y[:-r] += np.conj(d) * x[r:]
    return y


def _invit_vectors(band: np.ndarray, evals: np.ndarray, scale: float):
    """Eigenvectors by banded inverse iteration at known eigenvalues.

    Eigenvalues are grouped into clusters (degenerate pairs included);
    each cluster is solved with a common shifted factorization and
    orthonormalized, so exactly degenerate subspaces come out as clean
    orthogonal bases.  Returns None when a residual check fails.
    """
    rows, dim = band.shape
    l = rows - 1
    ab = np.zeros((2 * l + 1, dim), dtype=complex)
    for r in range(rows):
        ab[l + r, : dim - r] = band[r, : dim - r]
        if r:
            ab[l - r, r:] = np.conj(band[r, : dim - r])

    clusters = []
    start = 0
    for stop in range(1, evals.size + 1):
        if stop == evals.size or evals[stop] - evals[stop - 1] > 1e-7 * scale:
            clusters.append((start, stop))
            start = stop
    rng = np.random.default_rng(0x5eed)
    vecs = np.empty((dim, evals.size), dtype=complex)
    for a, b in clusters:
        m = b - a
        mu = float(np.mean(evals[a:b])) + 1e-11 * scale
        shifted = ab.copy()
        shifted[l] -= mu
        x = rng.standard_normal((dim, m)) + 1j * rng.standard_normal((dim, m))
        for _ in range(3):
            x = solve_banded((l, l), shifted, x)
            x, _ = np.linalg.qr(x)
        for j in range(m):
            res = _band_matvec(band, x[:, j]) - evals[a + j] * x[:, j]
            if np.linalg.norm(res) > 1e-8 * max(scale, 1.0):
                return None
        vecs[:, a:b] = x
    return vecs


def _window_states(band: np.ndarray, lo: float, hi: float, scale: float | None = None):
    """Eigenpairs of a lower-banded Hermitian matrix with eigenvalue in (lo, hi).

    Eigenvalues come from the banded solve-all path (cheap without
    vectors); vectors come from inverse iteration at those eigenvalues.
    Large problems go through shift-invert Lanczos instead, with k grown
    until an eigenvalue outside the window proves the window exhausted.
    LAPACK's own banded select='v' path runs minutes on complex strips
    and is never used.
    """
    dim = band.shape[1]
    center = 0.5 * (lo + hi)
    radius = 0.5 * (hi - lo)
    if scale is None:
        scale = float(np.max(np.abs(band)))
    if dim > 2400:  # banded eigvals + inverse iteration beats ARPACK below this
        h = _band_to_sparse(band)
        # fixed start vector keeps repeat runs bit-identical
        seed = np.random.default_rng(0x5eed)
        v0 = seed.standard_normal(dim)
        k = 8
        for sigma in (center, center + 0.125 * radius):
            try:
                while True:
                    vals, vecs = sparse_eigsh(
                        h, k=min(k, dim - 1), sigma=sigma, which="LM", v0=v0
                    )
                    if np.max(np.abs(vals - sigma)) > radius or k >= dim - 1:
                        keep = (vals > lo) & (vals < hi)
                        order = np.argsort(vals[keep])
                        return vals[keep][order], vecs[:, keep][:, order]
                    k *= 2
            except (RuntimeError, ArpackError):
                continue  # singular factorization or no convergence
    evals = eig_banded(band, lower=True, eigvals_only=True)
    keep = (evals > lo) & (evals < hi)
    if not np.any(keep):
        return evals[keep], np.empty((dim, 0), dtype=complex)
    vecs = _invit_vectors(band, evals[keep], scale)
    if vecs is None:
        evals, evecs = eig_banded(band, lower=True)
        keep = (evals > lo) & (evals < hi)
        return evals[keep], evecs[:, keep]
    return evals[keep], vecs


# ---- bulk band edges per k2 -------------------------------------------------


@dataclass(frozen=True)
class BandEdges:
    k2: np.ndarray
    lower_sup: np.ndarray  # sup over k1 of band `filling`
    upper_inf: np.ndarray  # inf over k1 of band `filling+1`
    refine_shift: float    # largest parabolic-refinement correction


def _two_band_energies(h: np.ndarray):
    mean = 0.5 * (h[..., 0, 0].real + h[..., 1, 1].real)
    rad = np.sqrt(
        (0.5 * (h[..., 0, 0].real - h[..., 1, 1].real)) ** 2
        + np.abs(h[..., 0, 1]) ** 2
    )
    return mean - rad, mean + rad


def _refined_max(vals: np.ndarray) -> tuple[np.ndarray, float]:
    """Cyclic parabolic refinement of max over axis 0; vals: (k1, k2)."""
    i = np.argmax(vals, axis=0)
    cols = np.arange(vals.shape[1])
    f0 = vals[i, cols]
    fm = vals[(i - 1) % vals.shape[0], cols]
    fp = vals[(i + 1) % vals.shape[0], cols]
    a2 = fp - 2.0 * f0 + fm
    safe = a2 < -1e-15
    corr = np.where(safe, (fp - fm) ** 2 / np.where(safe, 8.0 * a2, -1.0), 0.0)
    refined = f0 - corr
    return refined, float(np.max(np.abs(corr), initial=0.0))


def band_edges_grid(model: BulkModel, k2s: np.ndarray, k1_grid: int = 256) -> BandEdges:
    k2s = np.asarray(k2s, dtype=float)
    k1s = 2.0 * np.pi * np.arange(k1_grid) / k1_grid
    h = bloch_grid(model, k1s, k2s)
    if model.n_bands == 2 and model.filling == 1:
        lower, upper = _two_band_energies(h)
    else:
        ev = np.linalg.eigvalsh(h)
        lower = ev[..., model.filling - 1]
        upper = ev[..., model.filling]
    lower_sup, s1 = _refined_max(lower)
    upper_neg, s2 = _refined_max(-upper)
    return BandEdges(
        k2=k2s,
        lower_sup=lower_sup,
        upper_inf=-upper_neg,
        refine_shift=max(s1, s2),
    )


def band_edges_at_k2(model: BulkModel, k2: float, k1_grid: int = 512):
    """(lower_sup, upper_inf) at a single k2."""
    be = band_edges_grid(model, np.array([k2], dtype=float), k1_grid=k1_grid)
    return float(be.lower_sup[0]), float(be.upper_inf[0])


# ---- strip edge branches ----------------------------------------------------


@dataclass(frozen=True)
class EdgeBranch:
    side: str                  # "left" | "right"
    k2: np.ndarray             # monotone; may exceed 2*pi after seam merge
    energy: np.ndarray
    weight: np.ndarray         # edge weight in the quarter nearest the side
    xi: np.ndarray             # decay length estimate per point
    closed: bool = False       # True when the branch wraps the full circle
    source: str = "strip"

    def __len__(self) -> int:
        return self.k2.size


@dataclass(frozen=True)
class EdgeBranches:
    n_cells: int
    grid: int
    k2: np.ndarray
    band_edges: BandEdges
    branches: tuple = field(default_factory=tuple)


def _k2_nodes(model: BulkModel, grid: int) -> np.ndarray:
    # Offset keeps nodes away from k2 = 0 and pi, where Kramers pairs (AII)
    # or mirror-related left/right branches (symmetric class-A models) are
    # exactly degenerate and the eigensolver returns hybridized vectors that
    # fail the one-sided weight filter.
    return 2.0 * np.pi * (np.arange(grid) + 0.37) / grid


def _split_degenerate_sides(evals, vecs, n, nb, q, scale):
    """Rotate (near-)degenerate eigenvector clusters to extremal left-end weight.

    Decoupled-sector models (e.g. two time-reversed copies) carry exactly
    degenerate left/right pairs at every k2; any solver then returns
    arbitrary mixtures within the pair, which the one-sidedness filter
    would reject.  Left and right branches that cross each other do the
    same within the exponentially small finite-n coupling, so the cluster
    tolerance is kept well above e^{-n/xi} at working strip lengths.
    Diagonalizing the left-window projector inside each cluster restores
    the one-sided representatives; energies are reported from the
    unrotated eigenvalues, so the assignment error is at most the cluster
    width.
    """
    if evals.size < 2:
        return vecs
    vecs = vecs.copy()
    tol = 3e-4 * scale
    start = 0
    for stop in range(1, evals.size + 1):
        if stop < evals.size and evals[stop] - evals[stop - 1] < tol:
            continue
        if stop - start >= 2:
            blk = vecs[:, start:stop]
            pl = np.zeros(n * nb)
            pl[: q * nb] = 1.0
            _, rot = np.linalg.eigh(blk.conj().T @ (pl[:, None] * blk))
            vecs[:, start:stop] = blk @ rot
        start = stop
    return vecs


def _decay_length(cell_weight: np.ndarray, side: str) -> float:
    prof = cell_weight if side == "left" else cell_weight[::-1]
    n = prof.size
    xs = np.arange(1, max(n // 2, 4))
    xs = xs[xs < n]
    prof = prof[xs]
    keep = prof > 1e-280
    if np.count_nonzero(keep) < 3:
        return 1e-3
    slope = np.polyfit(xs[keep], np.log(prof[keep]), 1)[0]
    if slope >= -1e-12:
        return np.inf
    return float(-2.0 / slope)


def decay_estimate(model: BulkModel, energies, k2s: np.ndarray) -> float:
    """Worst-case decay length of half-line states at the given energies.

    At each k2 the slowest-decaying evanescent mode is the inside root of
    det[A(k2) + (V(k2) - E) lam + A(k2)^dag lam^2] closest to the unit
    circle; its -1/log|lam| bounds how many cells a strip needs before
    edge states become one-sided.  Solved as a companion pencil so that
    singular hopping (lam = 0 / infinity roots) needs no special casing.

    energies: scalar, or array of shape (len(k2s), m) giving the probe
    energies per node (decay slows toward the band edges, so callers
    probe the boundaries of whatever energy band they need classified).
    """
    k2s = np.atleast_1d(k2s)
    energies = np.asarray(energies, dtype=float)
    if energies.ndim == 0:
        energies = np.broadcast_to(energies.reshape(1, 1), (k2s.size, 1))
    nb = model.n_bands
    eye = np.eye(nb)
    zer = np.zeros((nb, nb))
    xi = 0.0
    for i, k2 in enumerate(k2s):
        v = model.v(k2)
        a = model.a(k2)
        ad = a.conj().T
        for energy in energies[i]:
            lhs = np.block([[zer, eye], [-a, -(v - energy * eye)]])
            rhs = np.block([[eye, zer], [zer, ad]])
            lam = scipy.linalg.eigvals(lhs, rhs)
            lam = np.abs(lam[np.isfinite(lam)])
            inside = lam[lam < 1.0 - 1e-8]
            if inside.size:
                top = float(np.max(inside))
                if top > 1e-300:
                    xi = max(xi, -1.0 / np.log(top))
    return xi


def _guard_band(vl, vu, fermi):
    """Energy band whose states must be classifiable for honest counting.

    A branch can only cross a fiducial at E_F by passing through energies
    near E_F, so a state lost to the one-sidedness filter matters iff it
    sits there; states hugging a band edge are entitled to delocalize.
    With fermi=None the whole interior of the gap is guarded.
    """
    g = vu - vl
    wlo, whi = vl + 0.15 * g, vu - 0.15 * g
    if fermi is not None:
        wlo = max(wlo, fermi - 0.35 * g)
        whi = min(whi, fermi + 0.35 * g)
    return wlo, whi


def strip_edge_branches(
    model: BulkModel,
    n: int = 60,
    grid: int = 721,
    min_weight: float = 0.9,
    k1_grid: int = 256,
    fermi: float = None,
) -> EdgeBranches:
    """In-gap, edge-localized strip states tracked into branches over k2.

    A state at node i is kept when its energy lies strictly between the
    per-k2 band edges and at least `min_weight` of its norm sits in the
    quarter of the strip nearest one side.  Branch continuation matches
    states at adjacent nodes by eigenvector overlap (>= 0.5) within an
    energy window of 5 * scale * dk2, same side only.  When `fermi` is
    given, truncation checks are scoped to the band around it (see
    _guard_band); pick n so that states there are one-sided.
    """
    if model.d != 2:
        raise ClassMismatch("edge branches need a d=2 model")
    gap_report(model)

    k2s = _k2_nodes(model, grid)
    edges = band_edges_grid(model, k2s, k1_grid=k1_grid)
    nb = model.n_bands
    q = int(np.ceil(n / 4))
    scale = model.energy_scale
    bound = 5.0 * scale * (2.0 * np.pi / grid)

    # selection: only states strictly inside the per-k2 bulk gap
    per_node = []  # list over nodes: list of dicts
    for i in range(grid):
        vl = float(edges.lower_sup[i])
        vu = float(edges.upper_inf[i])
        sel = []
        if vu - vl > 1e-12 * scale:
            evals, vecs = _window_states(_banded_strip(model, n, k2s[i]), vl, vu)
            vecs = _split_degenerate_sides(evals, vecs, n, nb, q, scale)
            for idx in range(evals.size):
                energy = float(evals[idx])
                if not (vl < energy < vu):
                    continue
                vec = vecs[:, idx]
                cellw = np.sum(np.abs(vec.reshape(n, nb)) ** 2, axis=1)
                wl = float(np.sum(cellw[:q]))
                wr = float(np.sum(cellw[-q:]))
                w = max(wl, wr)
                if w < min_weight:
                    # A state in the guarded band that is not one-sided is a
                    # truncation artifact, not bulk spillover; dropping it
                    # silently can sever a branch exactly where it crosses
                    # the fiducial line.
                    wlo, whi = _guard_band(vl, vu, fermi)
                    if wlo <= energy <= whi:
                        raise StripTooShort(
                            f"state at k2 = {k2s[i]:.4f}, E = {energy:.4f} is "
                            f"mid-gap but not one-sided (weights {wl:.2f}/"
                            f"{wr:.2f}, n = {n})"
                        )
                    continue
                side = "left" if wl >= wr else "right"
                sel.append(
                    {
                        "E": energy,
                        "side": side,
                        "w": w,
                        "xi": _decay_length(cellw, side),
                        "vec": vec,
                    }
                )
        sel.sort(key=lambda s: s["E"])
        per_node.append(sel)

    # tracking
    live = []  # dicts: side, i0, k2s, Es, ws, xis, vec, E
    finished = []

    def _close(br):
        finished.append(br)

    for i, states in enumerate(per_node):
        pairs = []
        for bi, br in enumerate(live):
            if br["i_last"] != i - 1:
                continue
            for si, st in enumerate(states):
                if st["side"] != br["side"]:
                    continue
                if abs(st["E"] - br["E"]) > bound:
                    continue
                ov = abs(np.vdot(br["vec"], st["vec"]))
                if ov >= 0.5:
                    pairs.append((ov, bi, si))
        pairs.sort(key=lambda t: -t[0])
        # a branch (or state) courted by two matches at indistinguishable
        # overlap cannot be continued reliably
        by_b, by_s = {}, {}
        for ov, bi, si in pairs:
            by_b.setdefault(bi, []).append(ov)
            by_s.setdefault(si, []).append(ov)
        for ovs in list(by_b.values()) + list(by_s.values()):
            if len(ovs) >= 2 and ovs[0] - ovs[1] < 0.05:
                raise TrackingAmbiguity(
                    f"eigenvector-overlap near-tie at k2 node {i}"
                )
        used_b, used_s = set(), set()
        for ov, bi, si in pairs:
            if bi in used_b or si in used_s:
                continue
            used_b.add(bi)
            used_s.add(si)
            st = states[si]
            br = live[bi]
            br["i_last"] = i
            br["k2s"].append(k2s[i])
            br["Es"].append(st["E"])
            br["ws"].append(st["w"])
            br["xis"].append(st["xi"])
            br["vec"] = st["vec"]
            br["E"] = st["E"]
        for bi in range(len(live) - 1, -1, -1):
            if live[bi]["i_last"] < i and bi not in used_b:
                _close(live.pop(bi))
        for si, st in enumerate(states):
            if si in used_s:
                continue
            live.append(
                {
                    "side": st["side"],
                    "i_first": i,
                    "i_last": i,
                    "k2s": [k2s[i]],
                    "Es": [st["E"]],
                    "ws": [st["w"]],
                    "xis": [st["xi"]],
                    "vec": st["vec"],
                    "vec0": st["vec"],
                    "E": st["E"],
                    "E0": st["E"],
                }
            )
    for br in live:
        _close(br)

    # seam: reconnect branches across k2 = 2*pi -> 0
    tail = [b for b in finished if b["i_last"] == grid - 1]
    head = [b for b in finished if b.get("i_first", 0) == 0]
    closed_ids = set()
    merges = []
    for bt in tail:
        best = None
        for bh in head:
            if bh["side"] != bt["side"]:
                continue
            if abs(bt["E"] - bh.get("E0", bh["Es"][0])) > bound:
                continue
            ov = abs(np.vdot(bt["vec"], bh.get("vec0", bh["vec"])))
            if ov >= 0.5 and (best is None or ov > best[0]):
                best = (ov, bh)
        if best is None:
            continue
        bh = best[1]
        if bh is bt:
            closed_ids.add(id(bt))
        else:
            merges.append((bt, bh))

    out = []
    absorbed = set()
    for bt, bh in merges:
        if id(bh) in absorbed or id(bt) in absorbed:
            continue
        bt["k2s"] = bt["k2s"] + [k + 2.0 * np.pi for k in bh["k2s"]]
        bt["Es"] += bh["Es"]
        bt["ws"] += bh["ws"]
        bt["xis"] += bh["xis"]
        absorbed.add(id(bh))
    for br in finished:
        if id(br) in absorbed:
            continue
        out.append(
            EdgeBranch(
                side=br["side"],
                k2=np.array(br["k2s"]),
                energy=np.array(br["Es"]),
                weight=np.array(br["ws"]),
                xi=np.array(br["xis"]),
                closed=id(br) in closed_ids,
                source="strip",
            )
        )

    # a branch may only terminate by approaching the bulk continuum.  An
    # endpoint stranded mid-gap is a severed branch: with fermi given,
    # only endpoints close to it threaten the crossing count, and since
    # the guarded-band weight check above already rules out truncation
    # loss, such a break is a sampling problem, not a strip-length one.
    for b in out:
        if b.closed:
            continue
        for k, e in ((b.k2[0], b.energy[0]), (b.k2[-1], b.energy[-1])):
            kf = np.mod(k, 2.0 * np.pi)
            vl = np.interp(kf, k2s, edges.lower_sup, period=2.0 * np.pi)
            vu = np.interp(kf, k2s, edges.upper_inf, period=2.0 * np.pi)
            g = vu - vl
            if fermi is None:
                if min(e - vl, vu - e) > 0.15 * g:
                    raise StripTooShort(
                        f"{b.side} branch terminates mid-gap at k2 = {kf:.4f},"
                        f" E = {e:.4f} (n = {n})"
                    )
            elif abs(e - fermi) <= 0.15 * g and min(e - vl, vu - e) > 0.15 * g:
                raise TrackingAmbiguity(
                    f"{b.side} branch severed near the fiducial at"
                    f" k2 = {kf:.4f}, E = {e:.4f} (grid = {grid})"
                )

    return EdgeBranches(
        n_cells=n, grid=grid, k2=k2s, band_edges=edges, branches=tuple(out)
    )


# ---- complex-momentum route -------------------------------------------------


@dataclass(frozen=True)
class LambdaRoots:
    roots: tuple            # finite quartic roots
    n_at_infinity: int
    classes: tuple          # "decaying" | "circle" | "growing" per finite root
    pairing_residual: float
    inside: tuple           # strictly decaying roots
    edge_state: bool
    null_residual: float | None


def _pairing_residual(roots, n_inf: int) -> float:
    """Max mismatch of the multiset under lambda -> 1/conj(lambda)."""
    zeros = [r for r in roots if abs(r) < 1e-12]
    if len(zeros) != n_inf:
        return np.inf
    rest = [r for r in roots if abs(r) >= 1e-12]
    worst = 0.0
    for r in rest:
        target = 1.0 / np.conj(r)
        d = min(abs(m - target) for m in rest) / max(1.0, abs(target))
        worst = max(worst, d)
    return worst


def edge_lambda_roots(model: BulkModel, energy: float, k2: float = 0.0) -> LambdaRoots:
    """Roots of the quartic lambda^2 [eta+ eta- + ||b0_perp||^2 - E^2] = 0.

    Decaying roots (|lambda| < 1 - 1e-8) are candidates for a half-line
    state at this energy; the state exists when exactly two decaying
    roots share a null vector of P(lambda) = A + (V-E) lambda + A' lambda^2
    (checked via the smallest singular value of the stacked system).
    """
    dm = dirac_decompose(model)
    b0, b = dm.b_at(k2)
    frame = ellipse.build_frame(b0, b)
    (bp, ap, gp), (bm, am, gm) = ellipse.eta_quad_coeffs(frame, b0, b)
    quartic = np.convolve([bp, ap, gp], [bm, am, gm]).astype(complex)
    quartic[2] += frame.b0_perp_norm**2 - float(energy) ** 2
    pr = poly_roots(quartic)

    classes = []
    inside = []
    for r in pr.finite:
        m = abs(r)
        if abs(m - 1.0) <= CIRCLE_BAND:
            classes.append("circle")
        elif m < 1.0:
            classes.append("decaying")
            inside.append(r)
        else:
            classes.append("growing")

    edge_state = False
    null_residual = None
    if len(inside) == 2:
        v = model.v(k2)
        a = model.a(k2)
        eye = np.eye(model.n_bands)
        stack = np.vstack(
            [a + (v - energy * eye) * lam + a.conj().T * lam**2 for lam in inside]
        )
        null_residual = float(np.linalg.svd(stack, compute_uv=False)[-1])
        edge_state = null_residual < 1e-8 * max(model.energy_scale, 1.0)

    return LambdaRoots(
        roots=tuple(pr.finite),
        n_at_infinity=pr.n_at_infinity,
        classes=tuple(classes),
        pairing_residual=_pairing_residual(pr.finite, pr.n_at_infinity),
        inside=tuple(inside),
        edge_state=edge_state,
        null_residual=null_residual,
    )


@dataclass(frozen=True)
class EdgeStateInfo:
    exists: bool
    energies: tuple          # left-edge energies; () when no state
    tau: int
    b0_perp_norm: float
    degenerate: str | None = None


def dirac_edge_states(model: BulkModel, k2: float) -> EdgeStateInfo:
    """Left-edge state existence and energies from the hopping ellipse.

    N=2: single state at tau * ||b0_perp||; N=4: a Kramers-type pair at
    +-||b0_perp||.  A segment-degenerate ellipse is reported as
    non-enclosing with no states.
    """
    dm = dirac_decompose(model)
    b0, b = dm.b_at(k2)
    frame = ellipse.build_frame(b0, b)
    if frame.zero_hopping:
        raise ZeroHopping("hopping matrix vanishes; no edge problem")
    if frame.segment:
        return EdgeStateInfo(
            exists=False,
            energies=(),
            tau=0,
            b0_perp_norm=frame.b0_perp_norm,
            degenerate="segment",
        )
    exists = ellipse.encloses_origin(frame)
    if not exists:
        energies = ()
    elif model.n_bands == 2:
        energies = (frame.tau * frame.b0_perp_norm,)
    else:
        energies = (-frame.b0_perp_norm, frame.b0_perp_norm)
    return EdgeStateInfo(
        exists=exists,
        energies=energies,
        tau=frame.tau,
        b0_perp_norm=frame.b0_perp_norm,
        degenerate="circle" if frame.circle else None,
    )


def _runs(mask: np.ndarray):
    """Cyclic runs of True; returns list of index arrays, or 'all'."""
    grid = mask.size
    if mask.all():
        return "all"
    if not mask.any():
        return []
    # rotate so position 0 is False, then split linearly
    start = int(np.argmin(mask))
    rolled = np.roll(mask, -start)
    runs = []
    i = 0
    while i < grid:
        if rolled[i]:
            j = i
            while j < grid and rolled[j]:
                j += 1
            runs.append((np.arange(i, j) + start) % grid)
            i = j
        else:
            i += 1
    return runs


def analytic_branches(model: BulkModel, grid: int = 721) -> list:
    """Left-edge branches from the complex-momentum route, sampled on a grid."""
    k2s = _k2_nodes(model, grid)
    infos = []
    for k2 in k2s:
        try:
            infos.append(dirac_edge_states(model, k2))
        except ZeroHopping:
            raise
    exists = np.array([bool(s.exists and s.energies) for s in infos])
    runs = _runs(exists)
    closed = runs == "all"
    if closed:
        runs = [np.arange(grid)]
    branches = []
    n_states = model.n_bands // 2
    for run in runs:
        for which in range(n_states):
            e = np.array([infos[i].energies[which] for i in run])
            branches.append(
                EdgeBranch(
                    side="left",
                    k2=_unwrap_nodes(k2s[run]),
                    energy=e,
                    weight=np.ones(run.size),
                    xi=np.full(run.size, np.nan),
                    closed=closed,
                    source="analytic",
                )
            )
    return branches


def _unwrap_nodes(k2: np.ndarray) -> np.ndarray:
    """Make a cyclic run monotone by unwrapping a single seam jump."""
    if k2.size < 2:
        return k2
    out = k2.copy()
    jumps = np.nonzero(np.diff(out) < 0)[0]
    if jumps.size:
        out[jumps[0] + 1 :] += 2.0 * np.pi
    return out


# ---- singular hopping route -------------------------------------------------


def _require_singular(model: BulkModel, k2s: np.ndarray) -> None:
    a = model.a.at(k2s)
    bad = float(np.max(np.abs(a[:, :, 1])))
    if bad > 1e-12 * max(model.energy_scale, 1.0):
        raise NotSingularHopping(
            f"second hopping column has weight {bad:.2e}; singular form required"
        )


def singular_edge_branches(model: BulkModel, grid: int = 721) -> list:
    """Exact left-edge branches for singular hopping matrices.

    With A = [[a11, 0], [a21, 0]], psi(x) = lambda^x (0, 1) solves the
    half-line problem exactly when H_12(lambda) = 0, i.e. at
    lambda* = -V_12/conj(A_21), and the energy is H_22 = V_22(k2).
    """
    if model.n_bands != 2 or model.d != 2:
        raise ClassMismatch("singular route is for 2-band d=2 models")
    k2s = _k2_nodes(model, grid)
    _require_singular(model, k2s)
    v = model.v.at(k2s)
    a = model.a.at(k2s)
    a21 = a[:, 1, 0]
    v12 = v[:, 0, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(np.abs(a21) > 0, -v12 / np.conj(a21), np.inf)
    exists = np.abs(lam) < 1.0 - CIRCLE_BAND
    energy = v[:, 1, 1].real
    with np.errstate(divide="ignore"):
        xi = np.where(
            np.abs(lam) > 1e-300, -1.0 / np.log(np.minimum(np.abs(lam), 1 - 1e-12)), 1e-12
        )
    runs = _runs(exists)
    closed = runs == "all"
    if closed:
        runs = [np.arange(grid)]
    return [
        EdgeBranch(
            side="left",
            k2=_unwrap_nodes(k2s[run]),
            energy=energy[run],
            weight=np.ones(run.size),
            xi=xi[run],
            closed=closed,
            source="singular",
        )
        for run in runs
    ]


@dataclass(frozen=True)
class IncipiencePoint:
    k: tuple                 # (k1, k2) on the torus
    sign: int                # calibrated contribution to the edge index
    exists_for: int          # edge state lives at k2 = k2_D + exists_for * 0+
    energy: float            # band energy at the merge point
    jacobian: float


def incipience_points_singular(model: BulkModel, grid: int = 24) -> list:
    """Band-edge merge points of the singular-hopping edge branch.

    These are the north-pole preimages of the normalized h-vector
    (h1 = h2 = 0, h3 > 0).  Each carries sgn(d1h1 d2h2 - d1h2 d2h1); the
    decay condition Im{delta_1} = J/(h11^2 + h21^2) * delta_2 > 0 fixes
    the side on which the edge state exists, which is cross-checked
    against ellipse enclosure on both sides.
    """
    from .bulk_invariants import (
        PREIMAGE_SIGN,
        _h3_eval,
        _padded_sigma_polys,
        _plane_zeros,
    )

    if model.n_bands != 2 or model.d != 2:
        raise ClassMismatch("singular route is for 2-band d=2 models")
    k2probe = 2.0 * np.pi * np.arange(64) / 64
    _require_singular(model, k2probe)
    gap_report(model)
    dm = dirac_decompose(model)
    polys = _padded_sigma_polys(dm)
    scale = model.energy_scale

    hits = _plane_zeros(polys, grid, 1e-10, scale)
    points = []
    eps = 1e-3
    for k in hits:
        h, jac = _h3_eval(polys, [k[0]], [k[1]])
        if h[0, 2] <= 0:
            continue
        j2 = jac[0, :2, :]
        jdet = float(j2[0, 0] * j2[1, 1] - j2[0, 1] * j2[1, 0])
        if abs(jdet) < 1e-8:
            raise DegenerateJacobian(
                f"in-plane Jacobian {jdet:.2e} too small near k = {k}"
            )
        side = int(np.sign(jdet))

        # decay-side consistency: enclosure must hold exactly on the side
        # where Im{delta_1} > 0.  Every plane zero (south preimages too)
        # toggles enclosure, so skip the check when any other sits close.
        lone = all(
            abs((k[1] - other[1] + np.pi) % (2 * np.pi) - np.pi) > 3 * eps
            for other in hits
            if other != k
        )
        if lone:
            for s, expect in ((side, True), (-side, False)):
                b0, b = dm.b_at(k[1] + s * eps)
                fr = ellipse.build_frame(b0, b)
                enc = (
                    False
                    if (fr.segment or fr.zero_hopping)
                    else ellipse.encloses_origin(fr)
                )
                if enc != expect:
                    raise MethodDisagreement(
                        "enclosure does not match the Im{delta_1} decay side "
                        f"near k2 = {k[1]:.6f}"
                    )

        h0 = dm.h0_onsite(k[1]).real + 2.0 * np.real(
            dm.h0_hop(k[1]) * np.exp(-1j * k[0])
        )
        points.append(
            IncipiencePoint(
                k=(float(k[0]), float(k[1])),
                sign=PREIMAGE_SIGN * int(np.sign(jdet)),
                exists_for=side,
                energy=float(h0 - h[0, 2]),
                jacobian=jdet,
            )
        )
    points.sort(key=lambda p: (p.k[1], p.k[0]))
    return points
