"""Nearest-neighbor tight-binding models and Bloch-Hamiltonian evaluation.

Conventions
-----------
A model is the pair (V, A): V(k2) the Hermitian on-cell matrix, A(k2)
the hopping matrix onto the next cell along direction 1.  The Bloch
Hamiltonian is

    H(k) = V(k2) + A(k2) e^{-i k1} + A(k2)^dag e^{+i k1}
         = V + 2 Re{A} cos k1 + 2 Im{A} sin k1,

with Re/Im the Hermitian/anti-Hermitian parts.  k2-dependence enters
through matrix-valued trigonometric polynomials F(k) = sum_m C_m e^{imk}
(arbitrary harmonic range in k2, exactly nearest-neighbor in k1).  In
one dimension V and A are constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Gapless, MalformedModel, ParseError, SchemaError
from .numerics import eig_hermitian

__all__ = [
    "FourierMatrix",
    "BulkModel",
    "GapReport",
    "SymmetryReport",
    "eval_bulk",
    "bloch_grid",
    "band_energies",
    "gap_report",
    "check_symmetries",
    "model_from_dict",
    "model_to_dict",
]

SYM_CLASSES = ("A", "AIII", "AII")


def _as_matrix(entry, n: int) -> np.ndarray:
    m = np.asarray(entry, dtype=complex)
    if m.shape != (n, n):
        raise MalformedModel(f"harmonic block has shape {m.shape}, expected ({n}, {n})")
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class FourierMatrix:
    """Matrix-valued trigonometric polynomial F(k) = sum_m C_m e^{i m k}."""

    n: int
    harmonics: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for m, block in self.harmonics.items():
            block = _as_matrix(block, self.n)
            if np.max(np.abs(block)) > 0:
                clean[int(m)] = block
        object.__setattr__(self, "harmonics", clean)

    @classmethod
    def constant(cls, block) -> "FourierMatrix":
        block = np.asarray(block, dtype=complex)
        return cls(n=block.shape[0], harmonics={0: block})

    def __call__(self, k2: float) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for m, block in self.harmonics.items():
            out += block * np.exp(1j * m * k2)
        return out

    def at(self, k2: np.ndarray) -> np.ndarray:
        """Batched evaluation: returns (len(k2), n, n)."""
        k2 = np.atleast_1d(np.asarray(k2, dtype=float))
        out = np.zeros((k2.size, self.n, self.n), dtype=complex)
        for m, block in self.harmonics.items():
            out += np.exp(1j * m * k2)[:, None, None] * block
        return out

    def dagger(self) -> "FourierMatrix":
        # F(k)^dag = sum_m C_{-m}^dag e^{imk}
        return FourierMatrix(
            self.n, {-m: block.conj().T for m, block in self.harmonics.items()}
        )

    def is_hermitian_valued(self, tol: float = 1e-12) -> bool:
        scale = self.max_abs() or 1.0
        for m, block in self.harmonics.items():
            other = self.harmonics.get(-m)
            ref = other if other is not None else np.zeros_like(block)
            if np.max(np.abs(block - ref.conj().T)) > tol * scale:
                return False
        return True

    def is_constant(self) -> bool:
        return all(m == 0 for m in self.harmonics)

    def max_abs(self) -> float:
        if not self.harmonics:
            return 0.0
        return float(sum(np.max(np.abs(b)) for b in self.harmonics.values()))


@dataclass(frozen=True)
class BulkModel:
    """A nearest-neighbor translation-invariant model on Z^d, d in {1, 2}.

    filling counts occupied bands from the bottom; the symmetry class is
    declared, then verified by check_symmetries where it matters.
    """

    d: int
    n_bands: int
    sym_class: str
    filling: int
    v: FourierMatrix
    a: FourierMatrix

    def __post_init__(self):
        if self.d not in (1, 2):
            raise MalformedModel(f"d must be 1 or 2, got {self.d}")
        if self.n_bands < 2:
            raise MalformedModel(f"need at least 2 bands, got {self.n_bands}")
        if self.sym_class not in SYM_CLASSES:
            raise MalformedModel(f"unknown symmetry class {self.sym_class!r}")
        if not (0 < self.filling < self.n_bands):
            raise MalformedModel(f"filling {self.filling} outside 1..{self.n_bands - 1}")
        if self.v.n != self.n_bands or self.a.n != self.n_bands:
            raise MalformedModel("V/A band count differs from N")
        if self.sym_class == "AIII" and self.n_bands % 2:
            raise MalformedModel("class AIII requires an even number of bands")
        if self.sym_class == "AII" and (self.n_bands != 4 or self.filling != 2):
            raise MalformedModel("class AII supported as N=4, filling=2")
        if self.d == 1 and not (self.v.is_constant() and self.a.is_constant()):
            raise MalformedModel("d=1 models must have constant V and A")
        if not self.v.is_hermitian_valued():
            raise MalformedModel("V(k2) is not Hermitian-valued")

    @property
    def energy_scale(self) -> float:
        return max(self.v.max_abs() + 2 * self.a.max_abs(), 1e-14)


def eval_bulk(model: BulkModel, k) -> np.ndarray:
    """Bloch Hamiltonian H(k), Hermitian N x N.

    k is a length-d sequence; the first component is the nearest-neighbor
    direction.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size != model.d:
        raise MalformedModel(f"momentum has {k.size} components, model has d={model.d}")
    k2 = k[1] if model.d == 2 else 0.0
    v = model.v(k2)
    a = model.a(k2)
    h = v + a * np.exp(-1j * k[0]) + a.conj().T * np.exp(1j * k[0])
    return 0.5 * (h + h.conj().T)  # kill roundoff skew


def bloch_grid(model: BulkModel, k1: np.ndarray, k2=None) -> np.ndarray:
    """Batched Bloch Hamiltonians.

    Returns (len(k1), N, N) for d=1 and (len(k1), len(k2), N, N) for d=2.
    """
    k1 = np.atleast_1d(np.asarray(k1, dtype=float))
    ph = np.exp(-1j * k1)
    if model.d == 1:
        v = model.v(0.0)
        a = model.a(0.0)
        h = v[None] + ph[:, None, None] * a + ph.conj()[:, None, None] * a.conj().T
        return h
    if k2 is None:
        raise MalformedModel("d=2 model needs a k2 grid")
    k2 = np.atleast_1d(np.asarray(k2, dtype=float))
    v = model.v.at(k2)          # (n2, N, N)
    a = model.a.at(k2)
    h = (
        v[None, :]
        + ph[:, None, None, None] * a[None, :]
        + ph.conj()[:, None, None, None] * np.conj(np.swapaxes(a, -1, -2))[None, :]
    )
    return h


def band_energies(model: BulkModel, k) -> np.ndarray:
    """Sorted eigenvalues of H(k)."""
    return eig_hermitian(eval_bulk(model, k))[0]


@dataclass(frozen=True)
class GapReport:
    """Minimum spectral gap between bands filling and filling+1 over a grid."""

    min_gap: float
    gap_center: float
    grid: int
    k_min: tuple[float, ...]

    @property
    def fermi_level(self) -> float:
        return self.gap_center


def _gap_at(model: BulkModel, k) -> tuple[float, float]:
    e = band_energies(model, k)
    f = model.filling
    return float(e[f] - e[f - 1]), float(0.5 * (e[f] + e[f - 1]))


def gap_report(model: BulkModel, grid_size: int = 64) -> GapReport:
    """Scan the gap on a uniform grid, refine once near the minimum.

    Raises Gapless when the minimum falls below 1e-6 (models here are
    O(1)-normalized, so the threshold is absolute).
    """
    if grid_size < 16:
        raise MalformedModel(f"gap grid must be >= 16 per dimension, got {grid_size}")
    ks = 2.0 * np.pi * np.arange(grid_size) / grid_size
    if model.d == 1:
        h = bloch_grid(model, ks)
    else:
        h = bloch_grid(model, ks, ks).reshape(-1, model.n_bands, model.n_bands)
    evals = np.linalg.eigvalsh(h)
    gaps = evals[:, model.filling] - evals[:, model.filling - 1]
    idx = int(np.argmin(gaps))
    if model.d == 1:
        k_min = np.array([ks[idx]])
    else:
        k_min = np.array([ks[idx // grid_size], ks[idx % grid_size]])
    best_gap = float(gaps[idx])
    center = float(0.5 * (evals[idx, model.filling] + evals[idx, model.filling - 1]))

    # one Newton step on the grid minimum (finite-difference gradient/Hessian)
    step = 2.0 * np.pi / grid_size / 8.0
    dim = model.d
    g0, _ = _gap_at(model, k_min)
    grad = np.zeros(dim)
    hess = np.zeros((dim, dim))
    for i in range(dim):
        e_i = np.zeros(dim)
        e_i[i] = step
        gp, _ = _gap_at(model, k_min + e_i)
        gm, _ = _gap_at(model, k_min - e_i)
        grad[i] = (gp - gm) / (2 * step)
        hess[i, i] = (gp - 2 * g0 + gm) / step**2
    if dim == 2:
        gpp, _ = _gap_at(model, k_min + [step, step])
        gpm, _ = _gap_at(model, k_min + [step, -step])
        gmp, _ = _gap_at(model, k_min + [-step, step])
        gmm, _ = _gap_at(model, k_min + [-step, -step])
        hess[0, 1] = hess[1, 0] = (gpp - gpm - gmp + gmm) / (4 * step**2)
    try:
        delta = -np.linalg.solve(hess, grad)
    except np.linalg.LinAlgError:
        delta = np.zeros(dim)
    cell = 2.0 * np.pi / grid_size
    if np.all(np.isfinite(delta)) and np.max(np.abs(delta)) <= cell:
        g_ref, c_ref = _gap_at(model, k_min + delta)
        if g_ref < best_gap:
            best_gap, center = g_ref, c_ref
            k_min = k_min + delta

    if best_gap < 1e-6:
        raise Gapless(f"minimum gap {best_gap:.3e} at k = {tuple(k_min)}")
    return GapReport(
        min_gap=best_gap, gap_center=center, grid=grid_size, k_min=tuple(float(x) for x in k_min)
    )


@dataclass(frozen=True)
class SymmetryReport:
    hermitian: bool
    chiral: bool
    tri: bool
    parity_table: dict


def _sym_grid(model: BulkModel, grid: int) -> np.ndarray:
    # includes no special points by construction; enough to falsify symmetry
    ks = 2.0 * np.pi * (np.arange(grid) + 0.37) / grid
    if model.d == 1:
        return ks[:, None]
    kk1, kk2 = np.meshgrid(ks, ks, indexing="ij")
    return np.stack([kk1.ravel(), kk2.ravel()], axis=1)


def check_symmetries(model: BulkModel, grid: int = 12) -> SymmetryReport:
    """Grid-sampled symmetry report: hermiticity, chirality, time reversal.

    chiral: Pi H(k) + H(k) Pi = 0 with Pi = diag(1,..,-1,..) in two
    blocks.  tri (N=4 only): H(-k) = Theta H(k) Theta^{-1} with
    Theta = (sigma_0 x sigma_2) K.  parity_table classifies every gamma
    coefficient d_{i,j}(k) as even/odd under k -> -k ("na" when absent
    or unclassifiable); for genuine TRI models the even set matches the
    TREI list.
    """
    from . import clifford  # deferred: clifford imports models

    pts = _sym_grid(model, grid)
    n = model.n_bands
    scale = model.energy_scale
    tol = 1e-10 * scale

    hs = np.stack([eval_bulk(model, k) for k in pts])
    hs_neg = np.stack([eval_bulk(model, -k) for k in pts])

    hermitian = bool(np.max(np.abs(hs - np.conj(np.swapaxes(hs, -1, -2)))) <= tol)

    pi = np.diag([1.0] * (n // 2) + [-1.0] * (n - n // 2)).astype(complex)
    chiral = bool(np.max(np.abs(pi @ hs @ pi + hs)) <= tol)

    tri = False
    if n == 4:
        theta = np.kron(clifford.PAULI[0], clifford.PAULI[2])
        tri = bool(np.max(np.abs(hs_neg - theta @ np.conj(hs) @ np.conj(theta.T))) <= tol)

    parity_table: dict = {}
    if n in (2, 4):
        for idx in clifford.gamma_indices(n):
            g = clifford.gamma(idx, n)
            d = np.einsum("kij,ji->k", hs, g) / n
            d_neg = np.einsum("kij,ji->k", hs_neg, g) / n
            if np.max(np.abs(d)) <= tol and np.max(np.abs(d_neg)) <= tol:
                parity_table[idx] = "na"
            elif np.max(np.abs(d_neg - d)) <= tol:
                parity_table[idx] = "even"
            elif np.max(np.abs(d_neg + d)) <= tol:
                parity_table[idx] = "odd"
            else:
                parity_table[idx] = "na"

    return SymmetryReport(hermitian=hermitian, chiral=chiral, tri=tri, parity_table=parity_table)


# ---- JSON schema -----------------------------------------------------------
#
# {"d": 1|2, "N": int, "class": "A"|"AIII"|"AII", "filling": int,
#  "V": {"<m>": N x N array of [re, im]}, "A": {same}}


def _matrix_from_json(entry, n: int, where: str) -> np.ndarray:
    if not isinstance(entry, list) or len(entry) != n:
        raise ParseError(f"{where}: expected {n} rows")
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(entry):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"{where}: row {i} must have {n} entries")
        for j, z in enumerate(row):
            if not (isinstance(z, list) and len(z) == 2):
                raise ParseError(f"{where}[{i}][{j}]: complex entries are [re, im] pairs")
            try:
                out[i, j] = complex(float(z[0]), float(z[1]))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{where}[{i}][{j}]: {exc}") from exc
    return out


def _fourier_from_json(data, n: int, name: str) -> FourierMatrix:
    if not isinstance(data, dict):
        raise SchemaError(f"{name} must be an object keyed by harmonic index")
    harmonics = {}
    for key, entry in data.items():
        try:
            m = int(key)
        except ValueError as exc:
            raise SchemaError(f"{name}: harmonic key {key!r} is not an integer") from exc
        harmonics[m] = _matrix_from_json(entry, n, f"{name}[{key}]")
    return FourierMatrix(n=n, harmonics=harmonics)


def model_from_dict(data: dict) -> BulkModel:
    """Build a BulkModel from schema-shaped data; raises SchemaError/ParseError."""
    if not isinstance(data, dict):
        raise SchemaError("model file must contain a JSON object")
    for key in ("d", "N", "class", "filling", "V", "A"):
        if key not in data:
            raise SchemaError(f"missing required field {key!r}")
    try:
        d = int(data["d"])
        n = int(data["N"])
        filling = int(data["filling"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"d/N/filling must be integers: {exc}") from exc
    sym_class = data["class"]
    if sym_class not in SYM_CLASSES:
        raise SchemaError(f"class must be one of {SYM_CLASSES}, got {sym_class!r}")
    v = _fourier_from_json(data["V"], n, "V")
    a = _fourier_from_json(data["A"], n, "A")
    return BulkModel(d=d, n_bands=n, sym_class=sym_class, filling=filling, v=v, a=a)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def model_to_dict(model: BulkModel) -> dict:
    """Inverse of model_from_dict; harmonic keys sorted for determinism."""
    return {
        "d": model.d,
        "N": model.n_bands,
        "class": model.sym_class,
        "filling": model.filling,
        "V": {
            str(m): _matrix_to_json(block)
            for m, block in sorted(model.v.harmonics.items())
        },
        "A": {
            str(m): _matrix_to_json(block)
            for m, block in sorted(model.a.harmonics.items())
        },
    }
