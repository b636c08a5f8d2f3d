import numpy as np
import pytest

from topoband.clifford import assemble_dirac, dirac_decompose
from topoband.edge_spectrum import (
    _banded_strip,
    _window_states,
    analytic_branches,
    band_edges_at_k2,
    band_edges_grid,
    build_strip,
    decay_estimate,
    dirac_edge_states,
    edge_lambda_roots,
    incipience_points_singular,
    singular_edge_branches,
    strip_edge_branches,
)
from topoband.ellipse import build_frame, inside_zero_count
from topoband.errors import ClassMismatch, NotSingularHopping, ZeroHopping
from topoband.models import gap_report
from topoband.presets import (
    qwz,
    qwz_singular,
    random_dirac2,
    random_tri_dirac,
    ssh,
)


def test_build_strip_structure():
    model = ssh(0.5, 1.0)
    strip = build_strip(model, 4)
    h = strip.matrix
    assert h.shape == (8, 8)
    assert np.max(np.abs(h - h.conj().T)) < 1e-14
    assert np.allclose(h[0:2, 0:2], [[0.0, 0.5], [0.5, 0.0]])
    assert np.allclose(h[2:4, 0:2], [[0.0, 0.0], [1.0, 0.0]])  # A below the diagonal
    assert np.allclose(h[0:2, 4:6], 0.0)  # nearest neighbor only
    one = build_strip(qwz(1.0), 1, k2=0.9)
    assert np.allclose(one.matrix, qwz(1.0).v(0.9))


def test_banded_strip_matches_dense():
    rng = np.random.default_rng(61)
    for _ in range(5):
        model = random_dirac2(rng)
        k2 = rng.uniform(0, 2 * np.pi)
        n = 24
        dense = build_strip(model, n, k2).matrix
        band = _banded_strip(model, n, k2)
        # reconstruct the dense lower triangle from banded storage
        dim = dense.shape[0]
        rebuilt = np.zeros_like(dense)
        for i in range(band.shape[0]):
            for j in range(dim - i):
                rebuilt[j + i, j] = band[i, j]
        rebuilt = rebuilt + np.tril(rebuilt, -1).conj().T
        assert np.max(np.abs(rebuilt - dense)) < 1e-14


def test_window_states_against_dense():
    rng = np.random.default_rng(62)
    for _ in range(5):
        model = random_dirac2(rng)
        k2 = rng.uniform(0, 2 * np.pi)
        n = 40
        band = _banded_strip(model, n, k2)
        dense = build_strip(model, n, k2).matrix
        scale = model.energy_scale
        all_e = np.linalg.eigvalsh(dense)
        lo, hi = np.quantile(all_e, [0.4, 0.6])
        evals, vecs = _window_states(band, lo, hi, scale)
        ref = all_e[(all_e > lo) & (all_e < hi)]
        assert evals.size == ref.size
        assert np.max(np.abs(np.sort(evals) - ref)) < 1e-8 * scale
        for e, v in zip(evals, vecs.T):
            r = _residual(dense, e, v)
            assert r < 1e-7 * scale


def _residual(h, e, v):
    return float(np.linalg.norm(h @ v - e * v) / np.linalg.norm(v))


def test_band_edges_qwz():
    model = qwz(1.0)
    k2s = np.linspace(0.3, 6.0, 9)
    edges = band_edges_grid(model, k2s, k1_grid=512)
    for i, k2 in enumerate(k2s):
        lo, hi = band_edges_at_k2(model, k2, k1_grid=512)
        assert abs(edges.lower_sup[i] - lo) < 1e-9
        assert abs(edges.upper_inf[i] - hi) < 1e-9
        # 1d scan oracle over k1 at fixed k2
        k1 = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
        h3 = 1.0 + np.cos(k1) + np.cos(k2)
        r = np.sqrt(np.sin(k1) ** 2 + np.sin(k2) ** 2 + h3**2)
        assert abs(lo - np.max(-r)) < 1e-5
        assert abs(hi - np.min(r)) < 1e-5


def test_strip_branches_qwz():
    model = qwz(1.0)
    br = strip_edge_branches(model, n=60, grid=241)
    assert br.branches, "expected edge branches in the qwz gap"
    edges = br.band_edges
    for b in br.branches:
        assert np.all(b.weight >= 0.9)
        lo = np.interp(np.mod(b.k2, 2 * np.pi), br.k2, edges.lower_sup, period=2 * np.pi)
        hi = np.interp(np.mod(b.k2, 2 * np.pi), br.k2, edges.upper_inf, period=2 * np.pi)
        assert np.all(b.energy > lo) and np.all(b.energy < hi)
    # the left branch runs through E=0 near k2=pi with negative slope
    left = [b for b in br.branches if b.side == "left"]
    assert left
    hits = []
    for b in left:
        e = b.energy
        for i in np.nonzero(np.sign(e[:-1]) * np.sign(e[1:]) < 0)[0]:
            k = b.k2[i] - e[i] * (b.k2[i + 1] - b.k2[i]) / (e[i + 1] - e[i])
            hits.append((np.mod(k, 2 * np.pi), np.sign(e[i + 1] - e[i])))
    assert len(hits) == 1
    assert abs(hits[0][0] - np.pi) < 0.02 and hits[0][1] < 0


def test_strip_matches_dirac_prediction():
    model = qwz(1.0)
    for k2 in (2.0, np.pi, 4.2):
        info = dirac_edge_states(model, k2)
        assert info.exists
        target = info.tau * info.b0_perp_norm
        e = np.linalg.eigvalsh(build_strip(model, 120, k2).matrix)
        assert np.min(np.abs(e - target)) < 1e-6


def test_dirac_edge_states_qwz():
    info = dirac_edge_states(qwz(1.0), 3.0 * np.pi / 4.0)
    assert info.exists and info.tau == 1
    assert abs(info.energies[0] - np.sin(3.0 * np.pi / 4.0)) < 1e-12
    info = dirac_edge_states(qwz(3.0), 3.0 * np.pi / 4.0)
    assert not info.exists and info.energies == ()
    with pytest.raises(ZeroHopping):
        dirac_edge_states(
            qwz(1.0)
            and __import__("topoband.clifford", fromlist=["assemble_dirac"]).assemble_dirac(
                2, {3: ({0: 1.0}, {})}
            ),
            1.0,
        )


def test_analytic_branches_match_strip():
    model = qwz(1.0)
    branches = analytic_branches(model, grid=241)
    assert branches
    for b in branches:
        assert b.source != "strip"
        for k2, e in zip(b.k2[::17], b.energy[::17]):
            se = np.linalg.eigvalsh(build_strip(model, 140, float(k2)).matrix)
            assert np.min(np.abs(se - e)) < 1e-6


def test_lambda_pairing_random():
    rng = np.random.default_rng(63)
    for _ in range(50):
        model = random_dirac2(rng)
        e = rng.uniform(-0.5, 0.5) * model.energy_scale
        k2 = rng.uniform(0, 2 * np.pi)
        roots = edge_lambda_roots(model, e, k2)
        assert len(roots.roots) + roots.n_at_infinity == 4
        assert roots.pairing_residual <= 1e-9


def test_edge_state_iff_two_inside_roots():
    # the half-line bound state exists iff one eta branch contributes both
    # decaying roots; cross-checks the argument principle against the
    # companion-matrix count
    rng = np.random.default_rng(64)
    n_exist = 0
    for _ in range(200):
        model = random_dirac2(rng)
        k2 = rng.uniform(0, 2 * np.pi)
        dm = dirac_decompose(model)
        b0, b = dm.b_at(k2)
        frame = build_frame(b0, b)
        if frame.segment:
            continue
        info = dirac_edge_states(model, k2)
        counts = []
        from topoband.ellipse import eta_quad_coeffs
        from topoband.numerics import poly_roots

        for branch, triple in zip((+1, -1), eta_quad_coeffs(frame, b0, b)):
            pr = poly_roots(np.array(triple))
            inside = int(np.sum(np.abs(pr.finite) < 1.0 - 1e-8))
            counts.append(inside)
            # argument principle agrees once the lambda=0 quadratic root
            # (beta = 0) is booked
            arg = inside_zero_count(frame, b0, b, branch)
            beta_zero = abs(triple[0]) < 1e-12 * max(frame.scale, 1e-300)
            assert inside == arg + (1 if beta_zero else 0)
        assert info.exists == (sorted(counts) == [0, 2])
        n_exist += int(info.exists)
    assert n_exist > 10


def test_decay_estimate_matches_lambda_roots():
    model = qwz(1.0)
    k2s = np.array([2.5])
    e = 0.3
    xi = decay_estimate(model, e, k2s)
    roots = edge_lambda_roots(model, e, float(k2s[0]))
    mags = [abs(r) for r in roots.roots if abs(r) < 1.0 - 1e-8]
    assert abs(xi - max(-1.0 / np.log(m) for m in mags)) < 1e-9
    # per-node energies: one row per k2, one column per probe
    xi2 = decay_estimate(model, np.array([[0.0, 0.3]]), k2s)
    assert xi2 >= xi - 1e-12


def test_singular_branch_closed_form():
    model = qwz_singular(1.0)
    branches = singular_edge_branches(model, grid=721)
    assert len(branches) == 1
    b = branches[0]
    assert b.side == "left" and not b.closed
    k2 = np.mod(b.k2, 2 * np.pi)
    assert np.all((k2 > np.pi / 2) & (k2 < 3 * np.pi / 2))
    assert np.max(np.abs(b.energy - np.sin(k2))) < 1e-12
    # dense strip must reproduce the closed form deep inside the window
    e = np.linalg.eigvalsh(build_strip(model, 80, 2.0).matrix)
    assert np.min(np.abs(e - np.sin(2.0))) < 1e-8
    with pytest.raises(NotSingularHopping):
        singular_edge_branches(qwz(1.0))


def test_incipience_points_qwz_singular():
    pts = incipience_points_singular(qwz_singular(1.0))
    assert len(pts) == 1
    p = pts[0]
    assert abs(p.k[0] - np.pi) < 1e-6 and abs(p.k[1] - 3 * np.pi / 2) < 1e-6
    assert p.jacobian < 0 and p.sign == +1
    with pytest.raises(ClassMismatch):
        incipience_points_singular(ssh(0.5))


def test_strip_branches_tri_even_pairs():
    rng = np.random.default_rng(65)
    model = random_tri_dirac(rng)
    rep = gap_report(model)
    br = strip_edge_branches(model, n=80, grid=121, fermi=rep.fermi_level)
    crossings = 0
    for b in br.branches:
        if b.side != "left":
            continue
        g = b.energy - rep.fermi_level
        crossings += int(np.sum(np.sign(g[:-1]) * np.sign(g[1:]) < 0))
        if b.closed and np.sign(g[0]) != np.sign(g[-1]):
            crossings += 1
    assert crossings % 2 == 0
