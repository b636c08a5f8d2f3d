import numpy as np
import pytest

from topoband.errors import NotAntisymmetric, NotHermitian, OddDimension, ZeroPolynomial
from topoband.numerics import eig_hermitian, pfaffian, poly_roots

from conftest import random_antisymmetric, random_hermitian

SIGMA3 = np.diag([1.0, -1.0])


def test_eig_hermitian_pauli3():
    evals, evecs = eig_hermitian(SIGMA3)
    assert np.allclose(evals, [-1.0, 1.0])
    # ascending order puts the -1 eigenvector (e2) first, up to phase
    assert abs(abs(evecs[1, 0]) - 1.0) < 1e-14
    assert abs(abs(evecs[0, 1]) - 1.0) < 1e-14


def test_eig_hermitian_reconstruction():
    # 1000 draws over the dimension set, small dims weighted heavily so the
    # large ones stay a spot check rather than the whole runtime
    rng = np.random.default_rng(11)
    dims = rng.choice([2, 4, 8, 64, 400], size=1000, p=[0.4, 0.3, 0.2, 0.07, 0.03])
    for n in (2, 4, 8, 64, 400):  # every dimension must actually appear
        assert np.any(dims == n)
    for n in dims:
        m = random_hermitian(rng, int(n))
        scale = np.max(np.abs(m))
        evals, evecs = eig_hermitian(m)
        assert np.all(np.diff(evals) >= 0)
        rec = (evecs * evals) @ evecs.conj().T
        assert np.max(np.abs(rec - m)) <= 1e-9 * scale
        gram = evecs.conj().T @ evecs
        assert np.max(np.abs(gram - np.eye(int(n)))) <= 1e-10


def test_eig_hermitian_rejects():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NotHermitian):
        eig_hermitian(np.zeros((2, 3)))


def test_poly_roots_quadratic():
    pr = poly_roots([-1.0, 0.0, 1.0])  # lambda^2 - 1, ascending coefficients
    assert pr.n_at_infinity == 0
    assert np.allclose(sorted(pr.finite.real), [-1.0, 1.0])
    assert np.max(np.abs(pr.finite.imag)) < 1e-12


def test_poly_roots_degenerate():
    pr = poly_roots([0.0, 0.0, 1.0])  # lambda^2: double root at zero
    assert pr.n_at_infinity == 0
    assert np.allclose(pr.finite, 0.0)

    pr = poly_roots([0.0, 0.0, 3.0, 0.0, 0.0])  # 3 lambda^2 as a quartic
    assert pr.n_at_infinity == 2
    assert pr.total_degree == 4
    assert np.allclose(pr.finite, 0.0)

    with pytest.raises(ZeroPolynomial):
        poly_roots([0.0, 0.0, 0.0])


def test_poly_roots_vieta():
    rng = np.random.default_rng(12)
    for _ in range(300):
        deg = int(rng.integers(1, 7))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        c[-1] += 3.0  # keep the leading coefficient away from the deflation cutoff
        pr = poly_roots(c)
        assert pr.n_at_infinity == 0
        assert len(pr.finite) == deg
        assert abs(np.sum(pr.finite) + c[-2] / c[-1]) <= 1e-8 * (1 + abs(c[-2] / c[-1]))
        prod = np.prod(pr.finite) if deg else 1.0
        target = (-1) ** deg * c[0] / c[-1]
        assert abs(prod - target) <= 1e-8 * (1 + abs(target))


def test_pfaffian_closed_forms():
    assert pfaffian([[0.0, 2.5], [-2.5, 0.0]]) == pytest.approx(2.5)
    m = np.zeros((4, 4))
    m[0, 1], m[1, 0] = 2.0, -2.0
    m[2, 3], m[3, 2] = 3.0, -3.0
    assert pfaffian(m) == pytest.approx(6.0)  # block-diagonal: product of blocks


def test_pfaffian_identities():
    rng = np.random.default_rng(13)
    for _ in range(200):
        a = random_antisymmetric(rng, 4)
        pf = pfaffian(a)
        assert abs(pf**2 - np.linalg.det(a)) <= 1e-10 * max(1.0, abs(pf) ** 2)
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        lhs = pfaffian(b @ a @ b.T)
        rhs = np.linalg.det(b) * pf
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_pfaffian_rejects():
    with pytest.raises(OddDimension):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(OddDimension):
        pfaffian(random_antisymmetric(np.random.default_rng(0), 6))
    with pytest.raises(NotAntisymmetric):
        pfaffian(np.eye(2))
