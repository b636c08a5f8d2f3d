"""Gamma matrices, Dirac decomposition, and time-reversal index bookkeeping.

Two-band gammas are the Pauli matrices (indices 1..3, identity 0);
four-band gammas are Kronecker products Gamma_(i,j) = sigma_i (x) sigma_j.
A model is "Dirac" when H(k) = h0(k) 1 + sum_j d_j(k) Gamma_j with the
active gammas pairwise anticommuting.  With time reversal
Theta = Gamma_(0,2) K, the coefficients on the six TREI indices are even
in k and all others odd.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadIndex, NotDirac
from .models import BulkModel, FourierMatrix, eval_bulk

__all__ = [
    "PAULI",
    "TREI",
    "gamma",
    "gamma_indices",
    "identity_index",
    "anticommute",
    "classify_trei",
    "TrigPoly",
    "DiracModel",
    "dirac_decompose",
    "assemble_dirac",
]

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULI.flags.writeable = False

# indices whose coefficients are even under Theta = Gamma_(0,2) K
TREI = frozenset({(0, 0), (1, 0), (3, 0), (2, 1), (2, 2), (2, 3)})


def identity_index(n: int):
    if n == 2:
        return 0
    if n == 4:
        return (0, 0)
    raise BadIndex(f"gamma algebra only provided for N in (2, 4), got {n}")


def gamma_indices(n: int) -> tuple:
    """All gamma indices for N bands, identity first."""
    if n == 2:
        return (0, 1, 2, 3)
    if n == 4:
        return tuple((i, j) for i in range(4) for j in range(4))
    raise BadIndex(f"gamma algebra only provided for N in (2, 4), got {n}")


@lru_cache(maxsize=None)
def _gamma_cached(idx, n: int) -> np.ndarray:
    if n == 2:
        if idx not in (0, 1, 2, 3):
            raise BadIndex(f"2-band gamma index must be 0..3, got {idx!r}")
        g = PAULI[idx].copy()
    elif n == 4:
        try:
            i, j = idx
        except (TypeError, ValueError):
            raise BadIndex(f"4-band gamma index must be a pair, got {idx!r}") from None
        if i not in range(4) or j not in range(4):
            raise BadIndex(f"4-band gamma index out of range: {idx!r}")
        g = np.kron(PAULI[i], PAULI[j])
    else:
        raise BadIndex(f"gamma algebra only provided for N in (2, 4), got {n}")
    g.flags.writeable = False
    return g


def gamma(idx, n: int) -> np.ndarray:
    """Hermitian gamma matrix for the given index; squares to identity."""
    return _gamma_cached(_freeze_index(idx), n)


def _freeze_index(idx):
    if isinstance(idx, (list, np.ndarray)):
        return tuple(int(x) for x in idx)
    if isinstance(idx, tuple):
        return tuple(int(x) for x in idx)
    return int(idx)


@lru_cache(maxsize=None)
def anticommute(idx1, idx2, n: int) -> bool:
    g1, g2 = gamma(idx1, n), gamma(idx2, n)
    return bool(np.max(np.abs(g1 @ g2 + g2 @ g1)) < 1e-12)


def classify_trei(idx) -> str:
    """'even' iff the 4-band index is in TREI, else 'odd'."""
    idx = _freeze_index(idx)
    if not (isinstance(idx, tuple) and len(idx) == 2):
        raise BadIndex(f"TREI classification needs a 4-band index, got {idx!r}")
    if idx[0] not in range(4) or idx[1] not in range(4):
        raise BadIndex(f"4-band gamma index out of range: {idx!r}")
    return "even" if idx in TREI else "odd"


@dataclass(frozen=True)
class TrigPoly:
    """Scalar trigonometric polynomial f(k) = sum_m c_m e^{imk}."""

    coeffs: tuple  # ((m, c_m), ...) sorted by m

    @classmethod
    def from_dict(cls, d: dict, tol: float = 0.0) -> "TrigPoly":
        items = tuple(
            (int(m), complex(c)) for m, c in sorted(d.items()) if abs(c) > tol
        )
        return cls(coeffs=items)

    def __call__(self, k: float) -> complex:
        return complex(sum(c * np.exp(1j * m * k) for m, c in self.coeffs))

    def at(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        out = np.zeros(k.shape, dtype=complex)
        for m, c in self.coeffs:
            out += c * np.exp(1j * m * k)
        return out

    def derivative(self) -> "TrigPoly":
        return TrigPoly(tuple((m, 1j * m * c) for m, c in self.coeffs if m != 0))

    def conjugate(self) -> "TrigPoly":
        return TrigPoly(tuple(sorted((-m, np.conj(c)) for m, c in self.coeffs)))

    def max_abs(self) -> float:
        return float(sum(abs(c) for _, c in self.coeffs))

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for _, c in self.coeffs)

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        d = dict(self.coeffs)
        return all(abs(c - np.conj(d.get(-m, 0.0))) <= tol for m, c in self.coeffs)

    def parity(self, tol: float = 1e-12) -> str:
        """'even'/'odd'/'none' under k -> -k."""
        d = dict(self.coeffs)
        if all(abs(c - d.get(-m, 0.0)) <= tol for m, c in self.coeffs):
            return "even"
        if all(abs(c + d.get(-m, 0.0)) <= tol for m, c in self.coeffs):
            return "odd"
        return "none"


def _extract(fm: FourierMatrix, g: np.ndarray, n: int, tol: float) -> TrigPoly:
    # coefficient of Gamma in F per k2-harmonic: tr(Gamma C_m)/N
    d = {m: np.trace(g @ block) / n for m, block in fm.harmonics.items()}
    return TrigPoly.from_dict(d, tol=tol)


@dataclass(frozen=True)
class DiracModel:
    """Coefficient form h(k) = b0(k2) + b(k2) e^{-ik1} + conj(b)(k2) e^{ik1}.

    indices are the active (traceless, pairwise-anticommuting) gammas;
    b0[j]/b[j] are the k2-trig-polynomial coefficients on indices[j].
    The identity component is kept separately (h0_onsite + h0_hop e^{-ik1}
    + c.c.) and must vanish for topological-index computations.
    """

    n_bands: int
    indices: tuple
    b0: tuple
    b: tuple
    h0_onsite: TrigPoly
    h0_hop: TrigPoly
    model: BulkModel

    @property
    def m(self) -> int:
        return len(self.indices)

    def trei_indices(self) -> tuple:
        if self.n_bands != 4:
            return ()
        return tuple(idx for idx in self.indices if idx in TREI)

    def trei_index(self):
        """The distinguished even index when exactly one is active."""
        evens = self.trei_indices()
        return evens[0] if len(evens) == 1 else None

    def b_at(self, k2: float):
        """(b0, b) coefficient vectors at k2: real (m,) and complex (m,)."""
        b0 = np.array([p(k2) for p in self.b0])
        b = np.array([p(k2) for p in self.b])
        return b0.real, b

    def h_at(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        k1 = k[0]
        k2 = k[1] if k.size > 1 else 0.0
        b0, b = self.b_at(k2)
        return b0 + 2.0 * np.real(b * np.exp(-1j * k1))

    def h_grid(self, k1: np.ndarray, k2: np.ndarray) -> np.ndarray:
        """h on the product grid, shape (len(k1), len(k2), m)."""
        k1 = np.atleast_1d(np.asarray(k1, dtype=float))
        k2 = np.atleast_1d(np.asarray(k2, dtype=float))
        ph = np.exp(-1j * k1)  # (n1,)
        b0 = np.stack([p.at(k2).real for p in self.b0], axis=-1)  # (n2, m)
        b = np.stack([p.at(k2) for p in self.b], axis=-1)  # (n2, m)
        return b0[None, :, :] + 2.0 * np.real(ph[:, None, None] * b[None, :, :])

    def h_jacobian(self, k) -> np.ndarray:
        """Analytic derivatives (dh_j/dk1, dh_j/dk2), shape (m, 2)."""
        k1, k2 = float(k[0]), float(k[1])
        ph = np.exp(-1j * k1)
        out = np.zeros((self.m, 2))
        for j in range(self.m):
            bj = self.b[j](k2)
            out[j, 0] = 2.0 * np.real(-1j * bj * ph)
            out[j, 1] = np.real(self.b0[j].derivative()(k2)) + 2.0 * np.real(
                self.b[j].derivative()(k2) * ph
            )
        return out

    def h0_max(self) -> float:
        return self.h0_onsite.max_abs() + 2.0 * self.h0_hop.max_abs()

    def h0_is_zero(self, tol: float = 1e-10) -> bool:
        scale = max(self.model.energy_scale, 1.0)
        return self.h0_max() <= tol * scale


def dirac_decompose(model: BulkModel, tol: float = 1e-10) -> DiracModel:
    """Extract gamma coefficients by the trace formula and validate.

    Raises NotDirac when the active gammas fail pairwise anticommutation
    (e.g. a model mixing Gamma_(1,1) and Gamma_(2,2) content) or the
    reconstruction misses the sampled Hamiltonian.
    """
    n = model.n_bands
    if n not in (2, 4):
        raise NotDirac(f"Dirac decomposition needs N in (2, 4), got {n}")
    scale = model.energy_scale
    coeff_tol = 1e-14 * scale

    ident = identity_index(n)
    h0_onsite = _extract(model.v, gamma(ident, n), n, coeff_tol)
    h0_hop = _extract(model.a, gamma(ident, n), n, coeff_tol)

    indices, b0s, bs = [], [], []
    for idx in gamma_indices(n):
        if idx == ident:
            continue
        g = gamma(idx, n)
        p0 = _extract(model.v, g, n, coeff_tol)
        p1 = _extract(model.a, g, n, coeff_tol)
        if p0.max_abs() + p1.max_abs() <= tol * scale:
            continue
        if not p0.is_real_valued(tol * scale):
            raise NotDirac(f"on-cell coefficient on gamma {idx} is not real-valued")
        indices.append(idx)
        b0s.append(p0)
        bs.append(p1)

    for a in range(len(indices)):
        for b_ in range(a + 1, len(indices)):
            if not anticommute(indices[a], indices[b_], n):
                raise NotDirac(
                    f"active gammas {indices[a]} and {indices[b_]} do not anticommute"
                )

    dm = DiracModel(
        n_bands=n,
        indices=tuple(indices),
        b0=tuple(b0s),
        b=tuple(bs),
        h0_onsite=h0_onsite,
        h0_hop=h0_hop,
        model=model,
    )

    # Pauli/Kronecker basis is complete, so this only guards against bugs.
    rng = np.random.default_rng(0)
    for k in rng.uniform(0.0, 2.0 * np.pi, size=(5, 2)):
        k = k[: model.d]
        h = eval_bulk(model, k)
        rebuilt = _assemble_at(dm, k)
        if np.max(np.abs(h - rebuilt)) > 1e-10 * max(scale, 1.0):
            raise NotDirac("reconstruction residual exceeds tolerance")
    return dm


def _assemble_at(dm: DiracModel, k) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    k1 = k[0]
    k2 = k[1] if k.size > 1 else 0.0
    n = dm.n_bands
    h = np.zeros((n, n), dtype=complex)
    hvals = dm.h_at(k)
    for j, idx in enumerate(dm.indices):
        h += hvals[j] * gamma(idx, n)
    h0 = dm.h0_onsite(k2) + 2.0 * np.real(dm.h0_hop(k2) * np.exp(-1j * k1))
    return h + np.real(h0) * np.eye(n)


def assemble_dirac(
    n: int,
    terms: dict,
    sym_class: str = "A",
    filling: int | None = None,
    d: int = 2,
) -> BulkModel:
    """Build a BulkModel from gamma coefficients.

    terms maps gamma index -> (b0_harmonics, b_harmonics), each a dict
    m -> complex giving the k2-trig-polynomial; b0 must be real-valued.
    Inverse of dirac_decompose up to dropped zero coefficients.
    """
    v_harm: dict = {}
    a_harm: dict = {}
    for idx, (b0_h, b_h) in terms.items():
        g = gamma(idx, n)
        if not TrigPoly.from_dict(b0_h).is_real_valued(1e-12):
            raise NotDirac(f"on-cell coefficient on gamma {idx} must be real-valued")
        for m, c in b0_h.items():
            v_harm[m] = v_harm.get(m, 0) + complex(c) * g
        for m, c in b_h.items():
            a_harm[m] = a_harm.get(m, 0) + complex(c) * g
    v = FourierMatrix(n, {m: blk for m, blk in v_harm.items()})
    a = FourierMatrix(n, {m: blk for m, blk in a_harm.items()})
    if filling is None:
        filling = n // 2
    return BulkModel(d=d, n_bands=n, sym_class=sym_class, filling=filling, v=v, a=a)
