import numpy as np
import pytest

from topoband.clifford import dirac_decompose
from topoband.ellipse import (
    build_frame,
    encloses_origin,
    eta_pm,
    eta_quad_coeffs,
    inside_zero_count,
)
from topoband.errors import DegenerateEllipse, LambdaZero, ZeroHopping
from topoband.presets import qwz


def _random_input(rng, m=3):
    b0 = rng.standard_normal(m)
    b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return b0, b


def test_frame_orthogonality():
    rng = np.random.default_rng(41)
    for i in range(1000):
        m = 5 if i % 10 == 0 else 3
        b0, b = _random_input(rng, m)
        f = build_frame(b0, b)
        if f.segment:
            continue  # measure-zero; degenerate draws handled below
        s = max(f.scale, 1e-300)
        assert abs(np.dot(f.e_r, f.e_i)) < 1e-10
        assert abs(np.linalg.norm(f.e_r) - 1) < 1e-12
        assert abs(np.linalg.norm(f.e_i) - 1) < 1e-12
        # b0 splits cleanly: parallel part in span(e_r, e_i), rest orthogonal
        par = np.dot(f.b0_par, f.e_r) * f.e_r + np.dot(f.b0_par, f.e_i) * f.e_i
        assert np.max(np.abs(par - f.b0_par)) < 1e-10 * s
        assert abs(np.dot(f.b0_perp, f.e_r)) < 1e-10 * s
        assert abs(np.dot(f.b0_perp, f.e_i)) < 1e-10 * s
        assert np.max(np.abs(f.b0_par + f.b0_perp - b0)) < 1e-12 * s
        assert (
            abs(
                np.dot(b0, b0)
                - np.dot(f.b0_par, f.b0_par)
                - np.dot(f.b0_perp, f.b0_perp)
            )
            < 1e-10 * s**2
        )


def test_frame_degenerate_flags():
    f = build_frame([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    assert f.zero_hopping and f.tau == 0
    with pytest.raises(ZeroHopping):
        encloses_origin(f)

    f = build_frame([0.0, 0.0, 1.0], [1.0, 2.0, 0.0])  # real b: segment
    assert f.segment and not f.zero_hopping and f.tau == 0
    with pytest.raises(DegenerateEllipse):
        encloses_origin(f)

    f = build_frame([0.0, 0.0, 1.0], [1.0j, 2.0j, 0.0])  # i * real: still a segment
    assert f.segment and f.swapped


def test_tau_orientation():
    # (h1, h2) = (cos k1, -sin k1): clockwise around +z
    f = build_frame([0.0, 0.0, 1.0], [0.5, -0.5j, 0.0])
    assert f.tau == -1 and f.circle and abs(f.b0_perp_norm - 1.0) < 1e-14
    # mirrored traversal is counter-clockwise
    f = build_frame([0.0, 0.0, 1.0], [0.5, 0.5j, 0.0])
    assert f.tau == +1 and f.circle


def test_eta_circle_closed_form():
    b0 = np.zeros(3)
    b = np.array([1.0, 1.0j, 0.0])
    f = build_frame(b0, b)
    assert f.circle
    rng = np.random.default_rng(42)
    for _ in range(25):
        lam = rng.uniform(0.3, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        pair = eta_pm(f, b0, b, lam)
        assert abs(pair.eta_plus - 2.0 / lam) < 1e-12
        assert abs(pair.eta_minus - 2.0 * lam) < 1e-12
    (bp, ap, gp), (bm, am, gm) = eta_quad_coeffs(f, b0, b)
    assert np.allclose([bp, ap, gp], [2.0, 0.0, 0.0])
    assert np.allclose([bm, am, gm], [0.0, 0.0, 2.0])
    assert inside_zero_count(f, b0, b, +1) == 0
    assert inside_zero_count(f, b0, b, -1) == 1
    with pytest.raises(LambdaZero):
        eta_pm(f, b0, b, 0.0)


def test_eta_conjugate_on_unit_circle():
    rng = np.random.default_rng(43)
    for _ in range(200):
        b0, b = _random_input(rng)
        f = build_frame(b0, b)
        if f.segment:
            continue
        lam = np.exp(1j * rng.uniform(0, 2 * np.pi))
        pair = eta_pm(f, b0, b, lam)
        assert abs(pair.eta_minus - np.conj(pair.eta_plus)) < 1e-10 * max(f.scale, 1.0)


def test_eta_matches_quadratic_coefficients():
    rng = np.random.default_rng(44)
    for _ in range(200):
        b0, b = _random_input(rng)
        f = build_frame(b0, b)
        if f.segment:
            continue
        (bp, ap, gp), (bm, am, gm) = eta_quad_coeffs(f, b0, b)
        lam = rng.uniform(0.2, 3.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        pair = eta_pm(f, b0, b, lam)
        assert abs(lam * pair.eta_plus - (bp + ap * lam + gp * lam**2)) < 1e-10 * max(
            f.scale, 1.0
        )
        assert abs(lam * pair.eta_minus - (bm + am * lam + gm * lam**2)) < 1e-10 * max(
            f.scale, 1.0
        )


def test_enclosure_rotation_invariant():
    rng = np.random.default_rng(45)
    checked = 0
    for _ in range(300):
        b0, b = _random_input(rng)
        f = build_frame(b0, b)
        if f.segment:
            continue
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        fr = build_frame(q @ b0, q @ b)
        assert encloses_origin(fr) == encloses_origin(f)
        assert fr.tau == f.tau
        assert abs(fr.b0_perp_norm - f.b0_perp_norm) < 1e-10 * max(f.scale, 1.0)
        checked += 1
    assert checked > 250


def test_enclosure_offset_circle():
    # unit circle in the (x, y) plane centered at (c, 0): inside iff |c| < 1
    b = np.array([0.5, -0.5j, 0.0])
    for c, expect in [(0.0, True), (0.5, True), (0.99, True), (1.01, False), (3.0, False)]:
        f = build_frame([c, 0.0, 0.7], b)
        assert encloses_origin(f) == expect


def test_enclosure_qwz():
    dm = dirac_decompose(qwz(1.0))
    b0, b = dm.b_at(3.0 * np.pi / 4.0)
    f = build_frame(b0, b)
    assert encloses_origin(f)
    assert f.tau == +1
    assert abs(f.b0_perp_norm - np.sin(3.0 * np.pi / 4.0)) < 1e-12

    dm = dirac_decompose(qwz(3.0))  # trivial: center too far out at every k2
    for k2 in (0.5, np.pi / 2, np.pi, 5.0):
        b0, b = dm.b_at(k2)
        assert not encloses_origin(build_frame(b0, b))
