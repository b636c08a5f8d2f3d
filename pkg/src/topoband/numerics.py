"""Dense numerical kernels: Hermitian eigensolver, polynomial roots, Pfaffian.

Every heavier computation in the package (Bloch spectra, strip
diagonalization, the quartic lambda equation, Kane-Mele diagnostics)
funnels through these three routines, so contracts are enforced here
rather than at the call sites.  All tolerances are relative to the
matrix/coefficient scale with an absolute floor of 1e-14.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DidNotConverge,
    NotAntisymmetric,
    NotHermitian,
    OddDimension,
    ZeroPolynomial,
)

ABS_FLOOR = 1e-14

__all__ = ["eig_hermitian", "poly_roots", "pfaffian", "PolyRoots", "ABS_FLOOR"]


def _scale(m: np.ndarray) -> float:
    s = float(np.max(np.abs(m))) if m.size else 0.0
    return max(s, ABS_FLOOR)


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : (n, n) array_like
        Hermitian within 1e-10 relative to its largest entry.

    Returns
    -------
    evals : (n,) ndarray
        Real eigenvalues in ascending order.
    evecs : (n, n) ndarray
        Orthonormal eigenvectors as columns, evecs[:, i] for evals[i].
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    s = _scale(m)
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > 1e-10 * s:
        raise NotHermitian(f"max|M - M^dag| = {dev:.3e} exceeds 1e-10 * scale {s:.3e}")
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise DidNotConverge(str(exc)) from exc
    return evals, evecs


@dataclass(frozen=True)
class PolyRoots:
    """Roots of a polynomial with explicit degree-deficiency bookkeeping.

    finite holds the roots of the deflated polynomial; n_at_infinity is
    the number of leading coefficients removed (each deflated degree is
    one root at infinity).
    """

    finite: np.ndarray
    n_at_infinity: int

    @property
    def total_degree(self) -> int:
        return len(self.finite) + self.n_at_infinity


def poly_roots(coeffs) -> PolyRoots:
    """Roots of a polynomial given ascending-degree complex coefficients.

    Leading coefficients below 1e-12 * max|c| are deflated and reported
    as roots at infinity instead of producing huge spurious finite
    roots; the edge quartic genuinely degenerates this way for circular
    ellipses.  Remaining roots come from the balanced companion matrix.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    if c.size == 0:
        raise ZeroPolynomial("no coefficients")
    cmax = float(np.max(np.abs(c)))
    if cmax <= ABS_FLOOR:
        raise ZeroPolynomial("all coefficients below the absolute floor")
    cutoff = 1e-12 * cmax
    eff = c.size
    while eff > 1 and abs(c[eff - 1]) < cutoff:
        eff -= 1
    n_inf = c.size - eff
    if eff == 1:
        finite = np.zeros(0, dtype=complex)
    else:
        finite = np.roots(c[eff - 1 :: -1])
    return PolyRoots(finite=finite, n_at_infinity=n_inf)


def pfaffian(m) -> complex:
    """Pfaffian of a 2x2 or 4x4 antisymmetric matrix (direct formulas)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OddDimension(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n % 2 == 1:
        raise OddDimension(f"Pfaffian undefined for odd dimension {n}")
    dev = float(np.max(np.abs(m + m.T))) if m.size else 0.0
    if dev > 1e-10 * _scale(m):
        raise NotAntisymmetric(f"max|M + M^T| = {dev:.3e}")
    if n == 2:
        return complex(m[0, 1])
    if n == 4:
        return complex(
            m[0, 1] * m[2, 3] - m[0, 2] * m[1, 3] + m[0, 3] * m[1, 2]
        )
    raise OddDimension(f"Pfaffian implemented for dimensions 2 and 4 only, got {n}")
