import numpy as np
import pytest

from topoband.bulk_invariants import (
    FH_SIGN,
    GREAT_CIRCLE_SIGN,
    PREIMAGE_SIGN,
    chern_fh,
    chern_great_circle,
    chern_north_preimage,
    km_dirac,
    trim_points,
    w_matrix_at_trim,
    winding_chiral,
)
from topoband.clifford import assemble_dirac
from topoband.correspondence import m_parity
from topoband.errors import (
    ClassMismatch,
    DegenerateZero,
    GapClosedAtTrim,
    Gapless,
    NotTRI,
    TangentCrossing,
)
from topoband.presets import bhz, qwz, random_chiral, random_dirac2, random_tri_dirac, ssh

QWZ_TABLE = {1.0: 1, -1.0: -1, 3.0: 0, -3.0: 0}


def test_sign_constants_frozen():
    # calibrated once against the left-edge crossing rule on the m=1 anchor;
    # a change here invalidates every stored result
    assert (FH_SIGN, PREIMAGE_SIGN, GREAT_CIRCLE_SIGN) == (1, -1, -1)


def test_winding_ssh():
    assert winding_chiral(ssh(0.5, 1.0)).value == -1
    assert winding_chiral(ssh(1.5, 1.0)).value == 0
    assert winding_chiral(ssh(-0.5, 1.0)).value == -1  # |v| < |w| still winds


def test_winding_scale_invariant():
    for v, w in [(0.3, 1.0), (1.2, 0.7)]:
        base = winding_chiral(ssh(v, w)).value
        assert winding_chiral(ssh(2.5 * v, 2.5 * w)).value == base


def test_winding_range_random():
    rng = np.random.default_rng(51)
    for _ in range(40):
        model = random_chiral(rng)
        assert winding_chiral(model).value in (-1, 0, 1)


def test_winding_rejects_nonchiral():
    with pytest.raises(ClassMismatch):
        winding_chiral(qwz(1.0))


def test_chern_qwz_table():
    for m, c in QWZ_TABLE.items():
        assert chern_fh(qwz(m)).value == c
        assert chern_north_preimage(qwz(m)).value == c
        assert chern_great_circle(qwz(m)).value == c


def test_chern_gapless_rejected():
    for m in (0.0, 2.0, -2.0):
        with pytest.raises(Gapless):
            chern_fh(qwz(m))


def test_chern_fh_grid_doubling_diagnostics():
    res = chern_fh(qwz(1.0))
    assert res.diagnostics["grids_checked"][0] == 24
    assert len(res.diagnostics["grids_checked"]) >= 2
    assert res.diagnostics["max_plaquette_flux"] < np.pi


def test_chern_three_way_random():
    rng = np.random.default_rng(52)
    n_gc = 0
    for _ in range(30):
        model = random_dirac2(rng)
        fh = chern_fh(model).value
        assert chern_north_preimage(model).value == fh
        try:
            gc = chern_great_circle(model).value
        except (TangentCrossing, DegenerateZero):
            continue  # non-transversal great-circle geometry is out of scope
        assert gc == fh
        n_gc += 1
    assert n_gc > 20


def test_trim_points():
    t1 = trim_points(1)
    assert len(t1.points) == 2 and len(t1.points) % 2 == 0
    assert t1.points == ((0.0,), (np.pi,))
    t2 = trim_points(2)
    assert len(t2.points) == 4
    assert (np.pi, np.pi) in t2.points


def test_km_dirac_bhz():
    for m, z2 in [(-3.0, 0), (-1.0, 1), (-0.5, 1), (0.5, 1), (1.0, 1), (3.0, 0)]:
        assert km_dirac(bhz(m)).value == z2
    with pytest.raises((Gapless, GapClosedAtTrim)):
        km_dirac(bhz(2.0))
    with pytest.raises(ClassMismatch):
        km_dirac(qwz(1.0))
    broken = assemble_dirac(
        4,
        {
            (1, 1): ({0: 0.8}, {0: 0.5j}),  # TR-odd gamma with an even coefficient
            (3, 0): ({0: 1.0, 1: 0.5, -1: 0.5}, {0: 0.5}),
        },
        sym_class="AII",
    )
    with pytest.raises(NotTRI):
        km_dirac(broken)


def test_km_equals_m_parity_random():
    rng = np.random.default_rng(53)
    for _ in range(20):
        model = random_tri_dirac(rng)
        assert km_dirac(model).value == m_parity(model)


def test_w_matrix_bhz():
    model = bhz(1.0)
    for k in trim_points(2).points:
        w, diag = w_matrix_at_trim(model, k)
        assert np.max(np.abs(w + w.T)) < 1e-10
        assert abs(abs(diag["pfaffian"]) - 1.0) < 1e-8


def test_w_matrix_random_tri():
    rng = np.random.default_rng(54)
    for _ in range(10):
        model = random_tri_dirac(rng)
        for k in trim_points(2).points:
            w, diag = w_matrix_at_trim(model, k)
            assert np.max(np.abs(w + w.T)) < 1e-10
            assert abs(abs(diag["pfaffian"]) - 1.0) < 1e-8
