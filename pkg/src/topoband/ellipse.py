"""Per-k2 ellipse geometry for nearest-neighbor Dirac coefficient curves.

At fixed k2 the coefficient vector h(k1) = b0 + 2 b^r cos k1 + 2 b^i sin k1
traces an ellipse in the plane spanned by (b^r, b^i), offset by the
out-of-plane part b0_perp.  Everything downstream (edge existence, edge
energy sign, the quartic lambda equation) reads off this frame.

Orientation convention: e_r = normalized b^r, e_i = Gram-Schmidt of b^i
against e_r (no sign adjustment), e_perp = normalized b0_perp.  For m=3
the sign tau = (e_r x e_i) . e_perp fixes the edge-state energy on the
half-line x in N as tau * ||b0_perp||; e_v = tau * e_i makes
(e_r, e_v, e_perp) right-handed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEllipse, LambdaZero, ZeroHopping

__all__ = ["EllipseFrame", "EtaPair", "build_frame", "encloses_origin", "eta_pm",
           "eta_quad_coeffs", "inside_zero_count"]

_TOL = 1e-12


@dataclass(frozen=True)
class EllipseFrame:
    m: int
    b0: np.ndarray
    b: np.ndarray
    e_r: np.ndarray | None
    e_i: np.ndarray | None
    e_v: np.ndarray | None
    e_perp: np.ndarray | None
    b0_par: np.ndarray
    b0_perp: np.ndarray
    b0_perp_norm: float
    tau: int
    zero_hopping: bool
    segment: bool
    circle: bool
    swapped: bool  # r/i roles taken from -i*b because b^r was degenerate
    center2: np.ndarray | None  # ellipse center in (e_r, e_i) coordinates
    axes2: np.ndarray | None  # columns: 2 b^r and 2 b^i in those coordinates
    scale: float


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def build_frame(b0, b) -> EllipseFrame:
    """Orthonormal frame, b0 split, orientation sign, degeneracy flags.

    Degenerate inputs come back flagged rather than raising; the
    operations that genuinely need a nondegenerate ellipse raise.
    """
    b0 = np.asarray(b0, dtype=float)
    b = np.asarray(b, dtype=complex)
    m = b0.size
    if b.size != m or m < 2 or m > 5:
        raise DegenerateEllipse(f"need matching b0/b of dimension 2..5, got {m}/{b.size}")
    scale = max(np.linalg.norm(b0), np.linalg.norm(b))

    if np.linalg.norm(b) < _TOL * max(scale, 1e-300):
        return EllipseFrame(
            m=m, b0=b0, b=b, e_r=None, e_i=None, e_v=None, e_perp=None,
            b0_par=np.zeros(m), b0_perp=b0, b0_perp_norm=float(np.linalg.norm(b0)),
            tau=0, zero_hopping=True, segment=True, circle=False, swapped=False,
            center2=None, axes2=None, scale=scale,
        )

    br, bi = b.real.copy(), b.imag.copy()
    swapped = False
    if np.linalg.norm(br) < _TOL * scale:
        # same ellipse re-parametrized: b -> -i b shifts k1 by pi/2
        br, bi = bi, -br
        swapped = True

    gram = np.linalg.norm(br) ** 2 * np.linalg.norm(bi) ** 2 - np.dot(br, bi) ** 2
    area = np.sqrt(max(gram, 0.0))
    segment = area < _TOL * scale**2
    circle = abs(np.sum(b * b)) < _TOL * scale**2

    e_r = _unit(br)
    if segment:
        e_i = e_v = None
        b0_par = np.dot(b0, e_r) * e_r
    else:
        e_i = _unit(bi - np.dot(bi, e_r) * e_r)
        e_v = e_i
        b0_par = np.dot(b0, e_r) * e_r + np.dot(b0, e_i) * e_i
    b0_perp = b0 - b0_par
    pnorm = float(np.linalg.norm(b0_perp))
    e_perp = b0_perp / pnorm if pnorm > _TOL * max(scale, 1e-300) else None

    tau = 0
    if m == 3 and not segment and e_perp is not None:
        tau = int(np.sign(np.dot(np.cross(e_r, e_i), e_perp)))
        if tau < 0:
            e_v = -e_i  # keep (e_r, e_v, e_perp) right-handed

    center2 = axes2 = None
    if not segment:
        center2 = np.array([np.dot(b0, e_r), np.dot(b0, e_i)])
        axes2 = np.array(
            [
                [2.0 * np.dot(br, e_r), 2.0 * np.dot(bi, e_r)],
                [0.0, 2.0 * np.dot(bi, e_i)],
            ]
        )

    return EllipseFrame(
        m=m, b0=b0, b=b, e_r=e_r, e_i=e_i, e_v=e_v, e_perp=e_perp,
        b0_par=b0_par, b0_perp=b0_perp, b0_perp_norm=pnorm, tau=tau,
        zero_hopping=False, segment=segment, circle=circle, swapped=swapped,
        center2=center2, axes2=axes2, scale=scale,
    )


def _require_ellipse(frame: EllipseFrame):
    if frame.zero_hopping:
        raise ZeroHopping("hopping coefficients vanish; no ellipse to analyze")
    if frame.segment:
        raise DegenerateEllipse("ellipse collapses to a segment")


def encloses_origin(frame: EllipseFrame) -> bool:
    """Does the in-plane curve wind around the plane origin?

    In (e_r, e_i) coordinates the curve is center2 + axes2 (cos k1, sin k1),
    so the origin is interior iff ||axes2^{-1} center2|| < 1.
    """
    _require_ellipse(frame)
    x = np.linalg.solve(frame.axes2, frame.center2)
    return bool(np.linalg.norm(x) < 1.0)


@dataclass(frozen=True)
class EtaPair:
    eta_plus: complex
    eta_minus: complex
    lam: complex


def eta_pm(frame: EllipseFrame, b0, b, lam: complex) -> EtaPair:
    """Analytic continuation h^{+-} at lambda; lambda = e^{ik1} recovers h^{+-}(k).

    eta^alpha(lam) = <b0,e^alpha> + <b,e^alpha>/lam + <conj(b),e^alpha> lam
    for alpha in {r, v}, and eta^{+-} = eta^r -+ i eta^v.
    """
    if abs(lam) == 0.0:
        raise LambdaZero("continuation is singular at lambda = 0")
    _require_ellipse(frame)
    b0 = np.asarray(b0, dtype=float)
    b = np.asarray(b, dtype=complex)

    def eta(axis):
        return np.dot(b0, axis) + np.dot(b, axis) / lam + np.dot(np.conj(b), axis) * lam

    er, ev = eta(frame.e_r), eta(frame.e_v)
    return EtaPair(eta_plus=er - 1j * ev, eta_minus=er + 1j * ev, lam=lam)


def eta_quad_coeffs(frame: EllipseFrame, b0, b):
    """Coefficients (beta, alpha, gamma) of lam*eta^{+-} = beta + alpha*lam + gamma*lam^2.

    Returns the (+) triple and the (-) triple.
    """
    _require_ellipse(frame)
    b0 = np.asarray(b0, dtype=float)
    b = np.asarray(b, dtype=complex)
    out = []
    for sgn in (-1.0, +1.0):  # eta^+ = eta^r - i eta^v, eta^- = eta^r + i eta^v
        axis = frame.e_r + sgn * 1j * frame.e_v
        beta = np.dot(b, axis)
        alpha = np.dot(b0, axis)
        gam = np.dot(np.conj(b), axis)
        out.append((complex(beta), complex(alpha), complex(gam)))
    return out[0], out[1]


def inside_zero_count(frame: EllipseFrame, b0, b, branch: int, quad: int = 1024) -> int:
    """Zeros of eta^branch (+1 or -1) inside the unit circle, by argument principle.

    Winding of eta on |lam|=1 equals zeros minus poles; eta has a simple
    pole at 0 whenever its 1/lam coefficient is nonzero.
    """
    (bp, ap, gp), (bm, am, gm) = eta_quad_coeffs(frame, b0, b)
    beta, alpha, gam = (bp, ap, gp) if branch > 0 else (bm, am, gm)
    theta = 2.0 * np.pi * np.arange(quad) / quad
    lam = np.exp(1j * theta)
    vals = alpha + beta / lam + gam * lam
    if np.min(np.abs(vals)) < 1e-12 * max(frame.scale, 1e-300):
        raise DegenerateEllipse("eta vanishes on the unit circle; zero count undefined")
    args = np.angle(vals)
    winding = np.round(np.sum(np.angle(np.exp(1j * np.diff(args, append=args[0])))) / (2 * np.pi))
    poles = 1 if abs(beta) > 1e-14 * max(frame.scale, 1e-300) else 0
    return int(winding) + poles
