"""Bulk topological indices: chiral winding, Chern (three routes), Kane-Mele.

Sign conventions.  The paper-style edge index (minus the sum of slope
signs of left-edge crossings, see edge_invariants) is the anchor.  The
plaquette-flux route chern_fh carries FH_SIGN so that its value equals
that edge count; the north-preimage and great-circle routes carry their
own constants calibrated once against chern_fh on the m=1 half-BHZ
(QWZ) model.  All three are frozen here and asserted by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ellipse
from .clifford import DiracModel, TrigPoly, dirac_decompose, gamma
from .errors import (
    ClassMismatch,
    DegenerateZero,
    DegeneracyMismatch,
    DidNotConverge,
    GapClosed,
    GapClosedAtTrim,
    MalformedModel,
    MethodDisagreement,
    NonzeroTracePart,
    NotTRI,
    TangentCrossing,
)
from .models import BulkModel, bloch_grid, check_symmetries, eval_bulk, gap_report

__all__ = [
    "InvariantResult",
    "TrimSet",
    "trim_points",
    "winding_chiral",
    "chern_fh",
    "chern_north_preimage",
    "chern_great_circle",
    "km_dirac",
    "w_matrix_at_trim",
]

# Calibrated on QWZ m=1 against the left-edge crossing count; do not edit
# without re-running the strip calibration in tests/test_acceptance.py.
FH_SIGN = +1
PREIMAGE_SIGN = -1
GREAT_CIRCLE_SIGN = -1


@dataclass(frozen=True)
class InvariantResult:
    value: int
    method: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrimSet:
    points: tuple


def trim_points(d: int) -> TrimSet:
    if d == 1:
        return TrimSet(points=((0.0,), (np.pi,)))
    if d == 2:
        return TrimSet(
            points=((0.0, 0.0), (0.0, np.pi), (np.pi, 0.0), (np.pi, np.pi))
        )
    raise MalformedModel(f"TRIM defined for d in (1, 2), got {d}")


# ---- class AIII ------------------------------------------------------------


def _chiral_blocks(model: BulkModel):
    """(t0, t_minus, t_plus): T(k) = H_21(k) = t0 + t- e^{-ik} + t+ e^{ik}."""
    v = model.v(0.0)
    a = model.a(0.0)
    return v[1, 0], a[1, 0], np.conj(a[0, 1])


def winding_chiral(model: BulkModel, grid: int = 720) -> InvariantResult:
    """Winding of the off-diagonal block T: S^1 -> C \\ {0}.

    Counterclockwise positive.  Computed by discrete arg-summation and
    independently from ellipse orientation x enclosure; the two must
    agree.
    """
    if model.d != 1 or model.n_bands != 2 or model.sym_class != "AIII":
        raise ClassMismatch("winding is defined for 1-d two-band chiral models")
    if not check_symmetries(model).chiral:
        raise ClassMismatch("model does not anticommute with the chirality operator")

    t0, tm, tp = _chiral_blocks(model)
    ks = 2.0 * np.pi * np.arange(grid) / grid
    tvals = t0 + tm * np.exp(-1j * ks) + tp * np.exp(1j * ks)
    if np.min(np.abs(tvals)) < 1e-8:
        raise GapClosed("off-diagonal block vanishes on the grid")
    dargs = np.angle(tvals[np.r_[1:grid, 0]] / tvals)
    total = np.sum(dargs) / (2.0 * np.pi)
    w_arg = int(np.round(total))

    # geometric route: T traces an ellipse in C ~ R^2,
    # Re T = b0_1 + 2 Re{b_1 e^{-ik}}, Im T = b0_2 + 2 Re{b_2 e^{-ik}}
    b0 = np.array([np.real(t0), np.imag(t0)])
    b = 0.5 * np.array([tm + np.conj(tp), 1j * (np.conj(tp) - tm)])
    frame = ellipse.build_frame(b0, b)
    if frame.zero_hopping or frame.segment:
        w_geo = 0  # point/segment away from zero never winds
    else:
        br, bi = b.real, b.imag
        orientation = int(np.sign(br[0] * bi[1] - br[1] * bi[0]))
        w_geo = orientation if ellipse.encloses_origin(frame) else 0

    if w_arg != w_geo:
        raise MethodDisagreement(
            f"arg-sum winding {w_arg} != ellipse winding {w_geo}"
        )
    return InvariantResult(
        value=w_arg,
        method="winding(arg-sum + ellipse)",
        diagnostics={"grid": grid, "arg_residual": float(abs(total - w_arg)),
                     "min_abs_t": float(np.min(np.abs(tvals)))},
    )


# ---- class A: Chern number -------------------------------------------------


def _fh_at(model: BulkModel, grid: int) -> tuple:
    ks = 2.0 * np.pi * np.arange(grid) / grid
    h = bloch_grid(model, ks, ks)
    _, vecs = np.linalg.eigh(h)
    occ = vecs[..., : model.filling]  # (g, g, N, f)

    def link(axis):
        shifted = np.roll(occ, -1, axis=axis)
        overlap = np.einsum("xyni,xynj->xyij", occ.conj(), shifted)
        det = np.linalg.det(overlap)
        if np.min(np.abs(det)) < 1e-12:
            raise DidNotConverge("singular link determinant; refine the grid")
        return det / np.abs(det)

    u1, u2 = link(0), link(1)
    flux = np.angle(u1 * np.roll(u2, -1, axis=0) * np.conj(np.roll(u1, -1, axis=1)) * np.conj(u2))
    total = np.sum(flux) / (2.0 * np.pi)
    value = int(np.round(total))
    if abs(total - value) > 1e-8:
        raise DidNotConverge(f"plaquette fluxes do not sum to an integer: {total}")
    return value, float(np.max(np.abs(flux)))


def chern_fh(model: BulkModel, grid: int = 24) -> InvariantResult:
    """Chern number by plaquette Berry-flux summation of the Fermi projection.

    Gauge-independent lattice field strength; the flux through every
    plaquette stays in (-pi, pi], so the total is an exact integer for
    any gapped model once the grid resolves the curvature.  The sum is an
    integer at ANY grid, so a single resolution cannot tell curvature
    concentrated near a small gap from an honest answer: the value is
    only returned once it agrees at grid and 2*grid.
    """
    if model.d != 2:
        raise ClassMismatch("Chern number needs a 2-d model")
    if grid < 24:
        raise MalformedModel(f"plaquette grid must be >= 24, got {grid}")
    gap_report(model)

    grids, fluxes = [], []
    value, flux = _fh_at(model, grid)
    grids.append(grid)
    fluxes.append(flux)
    while True:
        value2, flux2 = _fh_at(model, 2 * grid)
        grids.append(2 * grid)
        fluxes.append(flux2)
        if value2 == value:
            break
        grid *= 2
        value = value2
        if grid > 192:
            raise DidNotConverge(
                f"plaquette Chern number kept changing under grid doubling: "
                f"{dict(zip(grids, fluxes))}"
            )
    return InvariantResult(
        value=FH_SIGN * value,
        method="chern(plaquette-flux)",
        diagnostics={
            "grid": grids[-1],
            "grids_checked": grids,
            "max_plaquette_flux": fluxes[-1],
        },
    )


def _padded_sigma_polys(dm: DiracModel):
    """(b0_j, b_j) trig polys for j = 1..3, zero-padded for inactive sigmas."""
    zero = TrigPoly(())
    by_idx = {idx: (dm.b0[j], dm.b[j]) for j, idx in enumerate(dm.indices)}
    return [by_idx.get(j, (zero, zero)) for j in (1, 2, 3)]


def _require_invariant_dirac(model: BulkModel, n: int) -> DiracModel:
    dm = dirac_decompose(model)
    if dm.n_bands != n:
        raise ClassMismatch(f"expected an N={n} model, got N={dm.n_bands}")
    if not dm.h0_is_zero():
        raise NonzeroTracePart(
            "identity component must vanish for topological-index computations"
        )
    return dm


def _h3_eval(polys, k1, k2):
    """h_1..h_3 and their Jacobians on arrays of points; shapes (p,3), (p,3,2)."""
    k1 = np.atleast_1d(k1)
    k2 = np.atleast_1d(k2)
    ph = np.exp(-1j * k1)
    h = np.zeros((k1.size, 3))
    jac = np.zeros((k1.size, 3, 2))
    for j, (p0, p1) in enumerate(polys):
        b0 = p0.at(k2).real
        b = p1.at(k2)
        h[:, j] = b0 + 2.0 * np.real(b * ph)
        jac[:, j, 0] = 2.0 * np.real(-1j * b * ph)
        jac[:, j, 1] = np.real(p0.derivative().at(k2)) + 2.0 * np.real(
            p1.derivative().at(k2) * ph
        )
    return h, jac


def _plane_zeros(polys, grid: int, refine_tol: float, scale: float):
    """Deduped torus zeros of (h1, h2), by Newton from a full seed grid."""
    ks = 2.0 * np.pi * (np.arange(grid) + 0.5) / grid
    kk1, kk2 = np.meshgrid(ks, ks, indexing="ij")
    pts = np.stack([kk1.ravel(), kk2.ravel()], axis=1)

    for _ in range(60):
        h, jac = _h3_eval(polys, pts[:, 0], pts[:, 1])
        f = h[:, :2]
        j2 = jac[:, :2, :]
        det = j2[:, 0, 0] * j2[:, 1, 1] - j2[:, 0, 1] * j2[:, 1, 0]
        ok = np.abs(det) > 1e-14
        step = np.zeros_like(pts)
        inv_det = np.where(ok, det, 1.0)
        step[:, 0] = (j2[:, 1, 1] * f[:, 0] - j2[:, 0, 1] * f[:, 1]) / inv_det
        step[:, 1] = (-j2[:, 1, 0] * f[:, 0] + j2[:, 0, 0] * f[:, 1]) / inv_det
        step = np.clip(step, -0.5, 0.5)
        pts = np.where(ok[:, None], pts - step, pts)
    pts %= 2.0 * np.pi

    h, _ = _h3_eval(polys, pts[:, 0], pts[:, 1])
    resid = np.linalg.norm(h[:, :2], axis=1)
    converged = pts[resid <= refine_tol * scale]
    hits = []
    for k in converged:
        if not any(
            np.linalg.norm((k - np.array(p) + np.pi) % (2 * np.pi) - np.pi) < 1e-5
            for p in hits
        ):
            hits.append((float(k[0]), float(k[1])))
    return hits


def chern_north_preimage(
    model: BulkModel, grid: int = 24, refine_tol: float = 1e-10
) -> InvariantResult:
    """Chern number as the signed count of north-pole preimages of h-hat.

    Zeros of (h1, h2) are located by Newton iteration seeded on a full
    grid; each zero with h3 > 0 contributes sgn(d1h1 d2h2 - d1h2 d2h1).
    """
    gap_report(model)
    dm = _require_invariant_dirac(model, 2)
    polys = _padded_sigma_polys(dm)
    scale = model.energy_scale

    planar_active = any(
        polys[j][0].max_abs() + polys[j][1].max_abs() > 1e-12 * scale for j in (0, 1)
    )
    if not planar_active:
        # h parallel to e3 everywhere: constant direction, degree zero
        return InvariantResult(value=0, method="chern(north-preimage)",
                               diagnostics={"preimages": []})

    hits = _plane_zeros(polys, grid, refine_tol, scale)

    preimages = []
    signed = 0
    for k in hits:
        h, jac = _h3_eval(polys, [k[0]], [k[1]])
        if h[0, 2] <= 0:
            continue
        j2 = jac[0, :2, :]
        det = float(j2[0, 0] * j2[1, 1] - j2[0, 1] * j2[1, 0])
        if abs(det) < 1e-8:
            raise DegenerateZero(
                f"north pole is not a regular value near k = {k} (|J| = {abs(det):.2e})"
            )
        preimages.append({"k": k, "jacobian": det, "h3": float(h[0, 2])})
        signed += int(np.sign(det))

    return InvariantResult(
        value=PREIMAGE_SIGN * signed,
        method="chern(north-preimage)",
        diagnostics={"grid": grid, "preimages": preimages},
    )


def chern_great_circle(model: BulkModel, grid: int = 720) -> InvariantResult:
    """Chern number from great-circle crossings of the per-k2 image sphere.

    Tracks g(k2) = tau(k2) ||b0_perp(k2)||: a sign change while the
    ellipse encloses the origin is one crossing, signed +1 for a
    -1 -> +1 transition of tau.
    """
    gap_report(model)
    dm = _require_invariant_dirac(model, 2)
    polys = _padded_sigma_polys(dm)
    scale = model.energy_scale

    # offset keeps symmetric zeros (k2 = 0, pi) off the sample nodes
    k2s = 2.0 * np.pi * (np.arange(grid) + 0.37) / grid

    def frame_at(k2):
        b0 = np.array([float(p0.at(k2).real) for p0, _ in polys])
        b = np.array([complex(p1(k2)) for _, p1 in polys])
        return ellipse.build_frame(b0, b)

    def g_at(k2):
        fr = frame_at(k2)
        return fr.tau * fr.b0_perp_norm, fr

    gs = np.empty(grid)
    frames = []
    for i, k2 in enumerate(k2s):
        gs[i], fr = g_at(k2)
        frames.append(fr)

    if np.any(gs == 0.0):
        raise DegenerateZero("signed offset vanishes exactly on an offset grid node")

    crossings = []
    signed = 0
    for i in range(grid):
        j = (i + 1) % grid
        gi, gj = gs[i], gs[j]
        if gi * gj < 0.0:
            # bisect the sign change of the continuous signed offset
            lo, hi = k2s[i], k2s[i] + (k2s[j] - k2s[i]) % (2 * np.pi)
            glo = gi
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                gm, _ = g_at(mid)
                if gm == 0.0:
                    break
                if (gm > 0) == (glo > 0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            kc = 0.5 * (lo + hi) % (2 * np.pi)
            fr = frame_at(kc)
            if fr.segment or fr.zero_hopping:
                continue
            if not ellipse.encloses_origin(fr):
                continue
            sign = +1 if gj > gi else -1
            crossings.append({"k2": float(kc), "sign": sign})
            signed += sign

    # a near-zero dip of |g| without a sign flip is a tangency
    for i in range(grid):
        after, before = (i + 1) % grid, (i - 1) % grid
        if (
            abs(gs[i]) < 1e-7 * scale
            and gs[before] * gs[after] > 0
            and abs(gs[i]) <= abs(gs[before])
            and abs(gs[i]) <= abs(gs[after])
        ):
            fr = frames[i]
            if not fr.segment and not fr.zero_hopping and ellipse.encloses_origin(fr):
                raise TangentCrossing(
                    f"perpendicular offset touches zero without sign change near k2 = {k2s[i]:.6f}"
                )

    return InvariantResult(
        value=GREAT_CIRCLE_SIGN * signed,
        method="chern(great-circle)",
        diagnostics={"grid": grid, "crossings": crossings},
    )


# ---- class AII: Kane-Mele --------------------------------------------------


def km_dirac(model: BulkModel) -> InvariantResult:
    """Kane-Mele Z2 index from signs of the even coefficient at TRIM.

    With exactly one time-reversal-even gamma active, the index is the
    parity of negative d_e values over the four TRIM; with several even
    gammas active the phase is trivial.
    """
    if model.n_bands != 4:
        raise ClassMismatch("Kane-Mele index needs a 4-band model")
    if not check_symmetries(model).tri:
        raise NotTRI("model is not time-reversal invariant")
    dm = _require_invariant_dirac(model, 4)

    evens = dm.trei_indices()
    if len(evens) > 1:
        return InvariantResult(value=0, method="km(dirac-signs)",
                               diagnostics={"even_indices": list(map(list, evens))})
    if not evens:
        raise GapClosedAtTrim("no even gamma active: H vanishes at every TRIM")

    e = evens[0]
    j = dm.indices.index(e)
    scale = model.energy_scale
    signs = []
    values = {}
    for k in trim_points(2).points:
        b0 = dm.b0[j](k[1]).real
        b = dm.b[j](k[1])
        d = b0 + 2.0 * np.real(b * np.exp(-1j * k[0]))
        if abs(d) < 1e-10 * scale:
            raise GapClosedAtTrim(f"even coefficient vanishes at TRIM {k}")
        values[f"({k[0]:.3f},{k[1]:.3f})"] = float(d)
        signs.append(d < 0)
    return InvariantResult(
        value=int(sum(signs)) % 2,
        method="km(dirac-signs)",
        diagnostics={"even_index": list(e), "d_e_at_trim": values},
    )


def w_matrix_at_trim(model: BulkModel, k) -> tuple[np.ndarray, dict]:
    """Sewing matrix w_ij = <psi_i(-k), Theta psi_j(k)> at a TRIM point.

    The occupied basis is fixed deterministically (reference axes
    projected into the occupied space, ordered by projection norm,
    Gram-Schmidt, phases made real-positive on the largest component),
    so diagnostics are reproducible; the sign of Pf[w] is
    basis-dependent and reported as a diagnostic only.
    """
    if model.n_bands != 4 or model.filling != 2:
        raise ClassMismatch("w-matrix needs a 4-band half-filled model")
    k = np.asarray(k, dtype=float)
    if np.max(np.abs(np.sin(k))) > 1e-12:
        raise MalformedModel(f"{tuple(k)} is not a TRIM point")

    scale = model.energy_scale
    evals, vecs = np.linalg.eigh(eval_bulk(model, k))
    if evals[2] - evals[1] < 1e-8 * scale:
        raise DegeneracyMismatch("occupied space is not 2-dimensional at this TRIM")
    if evals[1] - evals[0] > 1e-8 * scale:
        raise DegeneracyMismatch("occupied pair is not Kramers-degenerate at this TRIM")

    occ = vecs[:, :2]
    cand = occ @ occ.conj().T  # columns: reference axes through the projector
    order = np.argsort(-np.linalg.norm(cand, axis=0))
    basis = []
    for idx in order:
        v = cand[:, idx].copy()
        for u in basis:
            v -= u * (u.conj() @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v /= nv
        lead = int(np.argmax(np.abs(v)))
        v *= np.exp(-1j * np.angle(v[lead]))
        basis.append(v)
        if len(basis) == 2:
            break
    if len(basis) < 2:
        raise DegeneracyMismatch("could not build a 2-dim occupied basis")
    psi = np.stack(basis, axis=1)

    theta_psi = gamma((0, 2), 4) @ np.conj(psi)
    w = psi.conj().T @ theta_psi

    antisym = float(np.max(np.abs(w + w.T)))
    pf = complex(w[0, 1])
    diagnostics = {
        "antisymmetry_residual": antisym,
        "pfaffian": pf,
        "abs_pfaffian": abs(pf),
        "energies": [float(x) for x in evals],
    }
    if antisym > 1e-10:
        raise NotTRI(f"sewing matrix is not antisymmetric (residual {antisym:.2e})")
    if abs(abs(pf) - 1.0) > 1e-8:
        raise DegeneracyMismatch(f"|Pf[w]| = {abs(pf):.12f} != 1")
    return w, diagnostics
