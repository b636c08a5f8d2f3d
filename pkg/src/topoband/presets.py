"""Bundled model families and random model samplers.

The random samplers use rejection: a draw is kept only if the bulk gap
is at least 0.05 after normalizing the energy scale to at most 4, which
keeps strip lengths and decay lengths desk-sized.  Samplers that feed
routes with transversality preconditions (regular north pole) reject
degenerate draws for the same reason the operations refuse them.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .clifford import assemble_dirac
from .edge_invariants import _max_decay
from .errors import DegenerateJacobian, DegenerateZero, Gapless, TopobandError
from .models import BulkModel, FourierMatrix, bloch_grid, gap_report

__all__ = [
    "ssh",
    "qwz",
    "qwz_singular",
    "bhz",
    "random_chiral",
    "random_dirac2",
    "random_singular2",
    "random_tri_dirac",
    "FAMILIES",
]

GAP_FLOOR = 0.05
SCALE_CAP = 4.0


def ssh(v: float, w: float = 1.0) -> BulkModel:
    """Dimerized chain: on-cell bond v, inter-cell bond w; topological for |v|<|w|."""
    return BulkModel(
        d=1,
        n_bands=2,
        sym_class="AIII",
        filling=1,
        v=FourierMatrix.constant([[0.0, v], [v, 0.0]]),
        a=FourierMatrix.constant([[0.0, 0.0], [w, 0.0]]),
    )


def qwz(m: float) -> BulkModel:
    """h = (sin k1, sin k2, m + cos k1 + cos k2); gap closes at |m| in {0, 2}."""
    return assemble_dirac(
        2,
        {
            1: ({}, {0: 0.5j}),
            2: ({1: -0.5j, -1: 0.5j}, {}),
            3: ({0: m, 1: 0.5, -1: 0.5}, {0: 0.5}),
        },
        sym_class="A",
        filling=1,
    )


def qwz_singular(m: float) -> BulkModel:
    """qwz(m) conjugated by a constant rotation so the hopping is singular.

    h = (m + cos k1 + cos k2, sin k1, -sin k2), i.e. A = [[0,0],[1,0]],
    V = (m + cos k2) sigma_1 - sin k2 sigma_3; same spectra and Chern
    numbers as qwz(m), but the half-line problem is exactly solvable.
    """
    return assemble_dirac(
        2,
        {
            1: ({0: m, 1: 0.5, -1: 0.5}, {0: 0.5}),
            2: ({}, {0: -0.5j}),
            3: ({1: 0.5j, -1: -0.5j}, {}),
        },
        sym_class="A",
        filling=1,
    )


def bhz(m: float) -> BulkModel:
    """Two time-reversed qwz copies; Z2-nontrivial for 0 < |m| < 2."""
    return assemble_dirac(
        4,
        {
            (1, 1): ({}, {0: 0.5j}),
            (1, 2): ({1: -0.5j, -1: 0.5j}, {}),
            (3, 0): ({0: m, 1: 0.5, -1: 0.5}, {0: 0.5}),
        },
        sym_class="AII",
        filling=2,
    )


FAMILIES = {
    "ssh": ssh,
    "qwz": qwz,
    "qwz_singular": qwz_singular,
    "bhz": bhz,
}


# ---- random samplers --------------------------------------------------------


def _normalized(model: BulkModel) -> BulkModel:
    s = model.energy_scale
    if s <= SCALE_CAP:
        return model
    f = SCALE_CAP / s
    return BulkModel(
        d=model.d,
        n_bands=model.n_bands,
        sym_class=model.sym_class,
        filling=model.filling,
        v=FourierMatrix(model.n_bands, {m: f * b for m, b in model.v.harmonics.items()}),
        a=FourierMatrix(model.n_bands, {m: f * b for m, b in model.a.harmonics.items()}),
    )


def _refined_min_gap(model: BulkModel) -> float:
    """Minimum direct gap: fine grid scan plus local polish.

    A dip whose sub-floor region covers a fraction of a percent of the
    zone slips straight through a coarse scan, and everything downstream
    (plaquette fluxes, strip lengths) silently degrades on such a model.
    The few lowest grid values are therefore refined by a local search
    before the floor is applied.
    """
    f = model.filling
    two_pi = 2.0 * np.pi

    def gap_at(k):
        if model.d == 1:
            h = bloch_grid(model, [k[0] % two_pi])[0]
        else:
            h = bloch_grid(model, [k[0] % two_pi], [k[1] % two_pi])[0, 0]
        e = np.linalg.eigvalsh(h)
        return float(e[f] - e[f - 1])

    if model.d == 1:
        ks = np.linspace(0.0, two_pi, 2048, endpoint=False)
        e = np.linalg.eigvalsh(bloch_grid(model, ks))
        g = e[:, f] - e[:, f - 1]
        seeds = [(ks[i],) for i in np.argsort(g)[:6]]
    else:
        ks = np.linspace(0.0, two_pi, 128, endpoint=False)
        e = np.linalg.eigvalsh(bloch_grid(model, ks, ks))
        g = e[..., f] - e[..., f - 1]
        flat = np.argsort(g, axis=None)[:6]
        seeds = [(ks[i // ks.size], ks[i % ks.size]) for i in flat]

    best = float(np.min(g))
    for s in seeds:
        res = minimize(
            gap_at,
            np.asarray(s, dtype=float),
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 200},
        )
        best = min(best, float(res.fun))
    return best


def _gapped(model: BulkModel) -> bool:
    try:
        if gap_report(model).min_gap < GAP_FLOOR:
            return False
    except Gapless:
        return False
    return _refined_min_gap(model) >= GAP_FLOOR


def _uh(rng) -> float:
    return float(rng.uniform(-1.0, 1.0))


def _uc(rng) -> complex:
    return complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))


def _draw(rng, build, accept=None, attempts: int = 400) -> BulkModel:
    for _ in range(attempts):
        model = _normalized(build(rng))
        if not _gapped(model):
            continue
        if accept is not None and not accept(model):
            continue
        return model
    raise RuntimeError("rejection sampling failed to find an admissible model")


def random_chiral(rng) -> BulkModel:
    """Gapped 1-d two-band chiral model with uniform complex couplings.

    Draws whose zero modes would need more cells than the strip cap are
    rejected along with the gapless ones (a hopping root hugging the unit
    circle means a near-closed gap the coarse scan can miss).
    """

    def build(r):
        t0 = _uc(r)
        tm = _uc(r)
        tp = _uc(r)
        return BulkModel(
            d=1,
            n_bands=2,
            sym_class="AIII",
            filling=1,
            v=FourierMatrix.constant([[0.0, np.conj(t0)], [t0, 0.0]]),
            a=FourierMatrix.constant([[0.0, np.conj(tp)], [tm, 0.0]]),
        )

    def accept(model):
        return _max_decay(model) <= 100.0

    return _draw(rng, build, accept=accept)


def _real_even_poly(rng, nharm: int) -> dict:
    """Harmonics of a real-valued trig polynomial c(k2)."""
    out = {0: complex(_uh(rng))}
    for m in range(1, nharm + 1):
        c = _uc(rng)
        out[m] = c
        out[-m] = np.conj(c)
    return out


def random_dirac2(rng, preimage_regular: bool = False) -> BulkModel:
    """Gapped traceless 2-band Dirac model, nearest-neighbor in both axes.

    With preimage_regular=True, draws where the north pole is not a
    regular value of h-hat (or where it sits on a plane of inactive
    components) are rejected, matching the preconditions of the
    preimage-counting route.
    """

    def build(r):
        terms = {}
        for j in (1, 2, 3):
            b0 = _real_even_poly(r, 1)
            b = {0: _uc(r), 1: _uc(r), -1: _uc(r)}
            terms[j] = (b0, b)
        return assemble_dirac(2, terms, sym_class="A", filling=1)

    accept = None
    if preimage_regular:
        from .bulk_invariants import chern_north_preimage

        def accept(model):
            try:
                chern_north_preimage(model)
            except DegenerateZero:
                return False
            return True

    return _draw(rng, build, accept=accept)


def random_singular2(rng) -> BulkModel:
    """Gapped 2-band model with singular hopping A = a21 |2><1|.

    V = h0(k2) + b0(k2) . sigma with real trig-polynomial coefficients up
    to second harmonics; the identity part h0 drops out of every edge
    quantity this family feeds.  Draws whose north-pole preimages have a
    near-singular in-plane Jacobian are rejected (transversality
    precondition of the incipience route).
    """

    def build(r):
        a21 = _uc(r)
        terms = {
            1: (_real_even_poly(r, 2), {0: 0.5 * a21}),
            2: (_real_even_poly(r, 2), {0: -0.5j * a21}),
            3: (_real_even_poly(r, 2), {}),
            0: ({0: 0.3 * _uh(r)}, {}),
        }
        return assemble_dirac(2, terms, sym_class="A", filling=1)

    def accept(model):
        from .edge_spectrum import incipience_points_singular

        try:
            incipience_points_singular(model)
        except (DegenerateJacobian, DegenerateZero):
            return False
        except TopobandError:
            return True  # anything else must surface in the tests, not here
        return True

    return _draw(rng, build, accept=accept)


def random_tri_dirac(rng) -> BulkModel:
    """Gapped 4-band time-reversal-invariant Dirac model.

    Gamma set {(3,0),(1,1),(1,2),(1,3),(2,0)}: exactly one even index.
    Evenness of d_(3,0) forces real harmonics there; oddness of the rest
    forces c0 = 0 on-cell and purely imaginary harmonics.
    """

    def odd_b0(r):
        c = 1j * _uh(r)
        return {1: c, -1: -c}

    def odd_b(r):
        return {0: 1j * _uh(r), 1: 1j * _uh(r), -1: 1j * _uh(r)}

    def even_b0(r):
        c = complex(_uh(r))
        return {0: complex(_uh(r)), 1: c, -1: c}

    def even_b(r):
        return {0: complex(_uh(r)), 1: complex(_uh(r)), -1: complex(_uh(r))}

    def build(r):
        terms = {(3, 0): (even_b0(r), even_b(r))}
        for idx in ((1, 1), (1, 2), (1, 3), (2, 0)):
            terms[idx] = (odd_b0(r), odd_b(r))
        return assemble_dirac(4, terms, sym_class="AII", filling=2)

    return _draw(rng, build)
