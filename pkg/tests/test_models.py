import numpy as np
import pytest

from topoband.errors import Gapless, MalformedModel
from topoband.models import (
    BulkModel,
    FourierMatrix,
    band_energies,
    bloch_grid,
    check_symmetries,
    eval_bulk,
    gap_report,
    model_from_dict,
    model_to_dict,
)
from topoband.presets import bhz, qwz, random_chiral, random_tri_dirac, ssh

SIGMA3 = np.diag([1.0, -1.0])


def test_fourier_matrix_periodic_and_batched():
    rng = np.random.default_rng(21)
    for _ in range(50):
        harmonics = {
            m: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            for m in (-2, -1, 0, 1)
        }
        f = FourierMatrix(2, harmonics)
        k = rng.uniform(0.0, 2.0 * np.pi)
        assert np.max(np.abs(f(k + 2.0 * np.pi) - f(k))) <= 1e-12 * f.max_abs()
        ks = rng.uniform(0.0, 2.0 * np.pi, size=7)
        batched = f.at(ks)
        for i, ki in enumerate(ks):
            assert np.allclose(batched[i], f(ki))


def test_fourier_matrix_hermitian_valued():
    # C_{-m} = C_m^dag  <=>  f(k) Hermitian for every real k
    block = np.array([[0.0, 1.0 + 2.0j], [0.5, 0.0]])
    f = FourierMatrix(2, {1: block, -1: block.conj().T, 0: np.eye(2)})
    assert f.is_hermitian_valued()
    for k in np.linspace(0, 2 * np.pi, 9):
        h = f(k)
        assert np.max(np.abs(h - h.conj().T)) < 1e-14
    g = FourierMatrix(2, {1: block})
    assert not g.is_hermitian_valued()


def test_eval_bulk_ssh_expansion():
    v, w = 0.5, 1.0
    model = ssh(v, w)
    for k in (0.0, np.pi / 3.0, np.pi):
        expect = np.array(
            [[0.0, v + w * np.exp(1j * k)], [v + w * np.exp(-1j * k), 0.0]]
        )
        assert np.max(np.abs(eval_bulk(model, [k]) - expect)) < 1e-14


def test_eval_bulk_qwz_expansion():
    m = 1.0
    model = qwz(m)
    assert np.max(np.abs(eval_bulk(model, [0.0, 0.0]) - 3.0 * SIGMA3)) < 1e-14
    rng = np.random.default_rng(22)
    paulis = [
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        np.array([[0.0, -1.0j], [1.0j, 0.0]]),
        SIGMA3.astype(complex),
    ]
    for _ in range(20):
        k1, k2 = rng.uniform(0, 2 * np.pi, size=2)
        h = np.array([np.sin(k1), np.sin(k2), m + np.cos(k1) + np.cos(k2)])
        expect = sum(hj * pj for hj, pj in zip(h, paulis))
        assert np.max(np.abs(eval_bulk(model, [k1, k2]) - expect)) < 1e-12
        e = band_energies(model, [k1, k2])
        assert np.allclose(e, [-np.linalg.norm(h), np.linalg.norm(h)], atol=1e-12)


def test_bloch_grid_matches_pointwise():
    model = qwz(1.0)
    k1 = np.linspace(0, 2 * np.pi, 5, endpoint=False)
    k2 = np.linspace(0, 2 * np.pi, 4, endpoint=False)
    grid = bloch_grid(model, k1, k2)
    assert grid.shape == (5, 4, 2, 2)
    for i, a in enumerate(k1):
        for j, b in enumerate(k2):
            assert np.allclose(grid[i, j], eval_bulk(model, [a, b]))
    chain = ssh(0.5)
    line = bloch_grid(chain, k1)
    assert line.shape == (5, 2, 2)
    for i, a in enumerate(k1):
        assert np.allclose(line[i], eval_bulk(chain, [a]))


def test_gap_report_ssh():
    rep = gap_report(ssh(0.5, 1.0))
    # |T(k)| = |0.5 + e^{ik}| minimized at k=pi -> gap 2*0.5
    assert abs(rep.min_gap - 1.0) < 1e-9
    assert abs(rep.gap_center) < 1e-12
    assert rep.fermi_level == rep.gap_center


def test_gap_report_qwz_flat_valley():
    rep = gap_report(qwz(1.0))
    # |h| = 1 along the whole line k1 = pi
    assert abs(rep.min_gap - 2.0) < 1e-9


def test_gapless_detection():
    with pytest.raises(Gapless):
        gap_report(qwz(2.0))
    with pytest.raises(Gapless):
        gap_report(ssh(1.0, 1.0))


def test_check_symmetries_presets():
    rep = check_symmetries(ssh(0.5))
    assert rep.hermitian and rep.chiral and not rep.tri

    rep = check_symmetries(qwz(1.0))
    assert rep.hermitian and not rep.chiral
    assert rep.parity_table[3] == "even" and rep.parity_table[1] == "odd"

    rep = check_symmetries(bhz(1.0))
    assert rep.hermitian and rep.tri
    evens = {idx for idx, p in rep.parity_table.items() if p == "even"}
    assert (3, 0) in evens


def test_random_tri_models_are_tri():
    rng = np.random.default_rng(23)
    for _ in range(10):
        model = random_tri_dirac(rng)
        rep = check_symmetries(model)
        assert rep.hermitian and rep.tri
        # Kramers: every band doubly degenerate at the TRIM
        for k in ((0.0, 0.0), (0.0, np.pi), (np.pi, 0.0), (np.pi, np.pi)):
            e = band_energies(model, list(k))
            assert abs(e[0] - e[1]) < 1e-10 * model.energy_scale
            assert abs(e[2] - e[3]) < 1e-10 * model.energy_scale


def test_random_chiral_models_are_chiral():
    rng = np.random.default_rng(24)
    for _ in range(25):
        model = random_chiral(rng)
        rep = check_symmetries(model)
        assert rep.hermitian and rep.chiral


def test_model_roundtrip():
    rng = np.random.default_rng(25)
    for model in (ssh(0.3), qwz(-1.0), bhz(1.5), random_tri_dirac(rng)):
        back = model_from_dict(model_to_dict(model))
        assert back.d == model.d and back.n_bands == model.n_bands
        assert back.sym_class == model.sym_class and back.filling == model.filling
        for k in np.linspace(0.1, 6.0, 5):
            kk = [k] if model.d == 1 else [k, 2.0 * k]
            assert np.max(np.abs(eval_bulk(back, kk) - eval_bulk(model, kk))) < 1e-14


def test_malformed_models_rejected():
    v = FourierMatrix.constant(np.zeros((2, 2)))
    a = FourierMatrix.constant(np.eye(2))
    with pytest.raises(MalformedModel):
        BulkModel(d=3, n_bands=2, sym_class="A", filling=1, v=v, a=a)
    with pytest.raises(MalformedModel):
        BulkModel(d=1, n_bands=2, sym_class="X", filling=1, v=v, a=a)
    with pytest.raises(MalformedModel):
        BulkModel(d=1, n_bands=2, sym_class="A", filling=2, v=v, a=a)
    with pytest.raises(MalformedModel):
        BulkModel(d=2, n_bands=2, sym_class="AII", filling=1, v=v, a=a)
    with pytest.raises(MalformedModel):  # d=1 must be k2-independent
        BulkModel(
            d=1, n_bands=2, sym_class="A", filling=1,
            v=FourierMatrix(2, {1: np.eye(2), -1: np.eye(2)}), a=a,
        )
    with pytest.raises(MalformedModel):  # V not Hermitian-valued
        BulkModel(
            d=1, n_bands=2, sym_class="A", filling=1,
            v=FourierMatrix.constant([[0.0, 1.0], [0.0, 0.0]]), a=a,
        )
