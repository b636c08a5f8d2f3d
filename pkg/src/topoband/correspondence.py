"""Numerical check of bulk-edge correspondence, per symmetry class.

verify() computes every applicable bulk index and every applicable edge
index for a model and reports whether they all agree.  Disagreement is
reported, never patched over: the point of the exercise is that the
equality is falsifiable.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bulk_invariants as bulk
from . import edge_invariants as edge
from . import edge_spectrum
from .clifford import dirac_decompose
from .errors import (
    ClassMismatch,
    DidNotConverge,
    EndpointZero,
    Gapless,
    ModelError,
    NumericalError,
    StripTooShort,
    TopobandError,
    TrackingAmbiguity,
    UnresolvedCrossing,
    UnresolvedSignChange,
)
from .models import BulkModel, gap_report

__all__ = [
    "CorrespondenceReport",
    "verify",
    "m_parity",
    "SweepRow",
    "sweep",
    "sweep_summary",
]


@dataclass(frozen=True)
class CorrespondenceReport:
    sym_class: str
    bulk: dict
    edge: dict
    equal: bool
    diagnostics: dict = field(default_factory=dict)


def _all_equal(values) -> bool:
    vals = list(values)
    return len(set(vals)) <= 1 and len(vals) > 0


def m_parity(model: BulkModel, grid: int = 361) -> int:
    """Z2 index as the sign-change parity of M(k2) = d_e(0,k2) d_e(pi,k2).

    d_e is the coefficient of the unique time-reversal-even gamma; M is
    real, and its sign-change count on [0, pi] mod 2 equals the parity
    of negative d_e values over the four invariant momenta.
    """
    dm = dirac_decompose(model)
    if dm.n_bands != 4:
        raise ClassMismatch("M(k2) parity needs a 4-band Dirac model")
    evens = dm.trei_indices()
    if len(evens) != 1:
        raise ClassMismatch(
            f"expected exactly one time-reversal-even gamma, found {len(evens)}"
        )
    j = dm.indices.index(evens[0])
    b0e, be = dm.b0[j], dm.b[j]

    # endpoints stay exactly at the invariant momenta; interior nodes are
    # shifted off the rational points where symmetric models zero out M
    k2s = np.linspace(0.0, np.pi, grid)
    k2s[1:-1] += 0.37 * (k2s[1] - k2s[0])
    base = b0e.at(k2s).real
    osc = 2.0 * be.at(k2s).real
    m_vals = (base + osc) * (base - osc)

    scale2 = max(model.energy_scale, 1e-30) ** 2
    if abs(m_vals[0]) < 1e-10 * scale2 or abs(m_vals[-1]) < 1e-10 * scale2:
        raise EndpointZero("M(k2) vanishes at an invariant momentum; gap closed there")
    if np.any(np.abs(m_vals[1:-1]) < 1e-12 * scale2):
        raise UnresolvedSignChange("M(k2) vanishes on an interior grid node")

    flips = np.nonzero(np.sign(m_vals[:-1]) * np.sign(m_vals[1:]) < 0)[0]
    spacing = np.pi / (grid - 1)
    zeros = []
    for i in flips:
        slope = (m_vals[i + 1] - m_vals[i]) / (k2s[i + 1] - k2s[i])
        zeros.append(k2s[i] - m_vals[i] / slope)
    for za, zb in zip(zeros, zeros[1:]):
        if zb - za < 0.5 * spacing:
            raise UnresolvedSignChange(
                f"two sign changes of M within half a node near k2 = {za:.4f}"
            )
    return len(zeros) % 2


def _verify_chiral(model: BulkModel, diagnostics: dict) -> tuple:
    w = bulk.winding_chiral(model)
    count = edge.chiral_zero_count(model)
    diagnostics["winding"] = w.diagnostics
    return {"winding": w.value}, {"zero_modes": count}


_STRIP_CAP = 1600


def _left_crossings(model: BulkModel, n: int, grid: int, fermi: float, diagnostics: dict):
    """Left-edge strip crossings of the constant fiducial.

    The strip starts at 8x the slowest evanescent decay length at E_F, so
    edge states clear the one-sidedness filter with margin on the first
    try; a count is accepted only once two successive resolutions report
    the same (count, signed sum).  Escalation never looks at the bulk
    answer -- it only demands that the edge count be stable against the
    strip length and the k2 grid.  The fiducial must clear both band
    edges by 20% of the local gap everywhere, else crossings next to a
    band edge could hide in the zone where underlocalized states are
    filtered out.
    """
    nodes = edge_spectrum._k2_nodes(model, grid)
    edges = edge_spectrum.band_edges_grid(model, nodes)
    margin = np.minimum(fermi - edges.lower_sup, edges.upper_inf - fermi)
    frac = margin / (edges.upper_inf - edges.lower_sup)
    if np.min(frac) < 0.2:
        raise UnresolvedCrossing(
            f"fiducial E_F = {fermi:.4f} comes within {100 * np.min(frac):.1f}%"
            " of a band edge; strip crossings there are not resolvable"
        )

    # budget the strip against the slowest decay anywhere in the guarded
    # band, not just at E_F: the boundaries decay slowest
    wlo, whi = np.vectorize(
        lambda a, b: edge_spectrum._guard_band(a, b, fermi)
    )(edges.lower_sup, edges.upper_inf)
    probes = np.column_stack([wlo, np.full(nodes.size, fermi), whi])
    xi = edge_spectrum.decay_estimate(model, probes, nodes)
    n0 = max(n, int(np.ceil(6.0 * xi)))
    if n0 > _STRIP_CAP:
        raise StripTooShort(
            f"edge states near E_F = {fermi:.4f} decay over ~{xi:.0f} cells;"
            f" the strip needed exceeds the {_STRIP_CAP}-cell cap"
        )

    fid = edge.FiducialLine.constant(fermi)
    history = []
    previous = None
    ni, gi = n0, grid
    for _ in range(7):
        try:
            branches = edge_spectrum.strip_edge_branches(
                model, n=ni, grid=gi, fermi=fermi
            )
            left = [b for b in branches.branches if b.side == "left"]
            crossings = edge.find_crossings(left, fid, model.energy_scale)
        except StripTooShort as exc:
            history.append((ni, gi, type(exc).__name__))
            previous = None
            ni = int(np.ceil(1.5 * ni))
            if ni > 4 * _STRIP_CAP:
                raise StripTooShort(f"{exc} [after {history}]")
            continue
        except (TrackingAmbiguity, UnresolvedCrossing) as exc:
            history.append((ni, gi, type(exc).__name__))
            previous = None
            gi *= 2
            if gi > 8 * grid:
                raise TrackingAmbiguity(f"{exc} [after {history}]")
            continue
        sig = (
            len(crossings.crossings),
            -sum(c.slope_sign for c in crossings.crossings),
        )
        history.append((ni, gi, sig))
        if previous is not None and previous[0] == sig:
            diagnostics["n_cells"] = ni
            diagnostics["grid"] = gi
            diagnostics["fermi_level"] = fermi
            diagnostics["xi_estimate"] = xi
            diagnostics["strip_history"] = history
            diagnostics["crossings"] = [
                (c.k2, c.slope_sign) for c in crossings.crossings
            ]
            return crossings
        previous = (sig, crossings)
        ni = int(np.ceil(1.5 * ni))
    raise DidNotConverge(
        f"strip crossing count did not stabilize: {history}"
    )


def _verify_classa(model: BulkModel, n: int, grid: int, diagnostics: dict) -> tuple:
    bulk_vals = {"fh": bulk.chern_fh(model).value}
    skipped = {}
    for name, fn in (
        ("north_preimage", bulk.chern_north_preimage),
        ("great_circle", bulk.chern_great_circle),
    ):
        try:
            bulk_vals[name] = fn(model).value
        except TopobandError as exc:
            skipped[name] = f"{type(exc).__name__}: {exc}"

    singular = True
    try:
        probe = 2.0 * np.pi * (np.arange(64) + 0.37) / 64
        edge_spectrum._require_singular(model, probe)
    except TopobandError:
        singular = False

    edge_vals = {}
    if singular:
        try:
            pts = edge_spectrum.incipience_points_singular(model)
            bulk_vals["incipience"] = sum(p.sign for p in pts)
            diagnostics["incipience_points"] = [
                {"k": p.k, "sign": p.sign, "energy": p.energy} for p in pts
            ]
        except TopobandError as exc:
            skipped["incipience"] = f"{type(exc).__name__}: {exc}"
        try:
            value, diag = edge._band_edge_crossings(model, grid=4096, k1_grid=1024)
            edge_vals["band_edge_fiducial"] = value
            diagnostics["band_edge"] = diag
        except TopobandError as exc:
            skipped["band_edge_fiducial"] = f"{type(exc).__name__}: {exc}"

    fermi = gap_report(model).fermi_level
    crossings = _left_crossings(model, n, grid, fermi, diagnostics)
    edge_vals["strip_crossings"] = -sum(c.slope_sign for c in crossings.crossings)

    diagnostics["skipped"] = skipped
    return bulk_vals, edge_vals


def _verify_tri(model: BulkModel, n: int, grid: int, diagnostics: dict) -> tuple:
    bulk_vals = {"km_dirac": bulk.km_dirac(model).value}
    skipped = {}
    try:
        bulk_vals["m_parity"] = m_parity(model)
    except TopobandError as exc:
        skipped["m_parity"] = f"{type(exc).__name__}: {exc}"

    fermi = gap_report(model).fermi_level
    crossings = _left_crossings(model, n, grid, fermi, diagnostics)
    edge_vals = {"km_edge": edge.km_edge(len(crossings))}

    diagnostics["skipped"] = skipped
    return bulk_vals, edge_vals


def verify(model: BulkModel, n: int = 60, grid: int = 721) -> CorrespondenceReport:
    """Bulk indices vs edge indices; equal=True iff every method agrees."""
    gap_report(model)
    diagnostics: dict = {"n_cells": n, "grid": grid}
    if model.sym_class == "AIII":
        bulk_vals, edge_vals = _verify_chiral(model, diagnostics)
    elif model.sym_class == "A":
        bulk_vals, edge_vals = _verify_classa(model, n, grid, diagnostics)
    elif model.sym_class == "AII":
        bulk_vals, edge_vals = _verify_tri(model, n, grid, diagnostics)
    else:
        raise ClassMismatch(f"no correspondence check for class {model.sym_class!r}")

    equal = _all_equal(list(bulk_vals.values()) + list(edge_vals.values()))
    return CorrespondenceReport(
        sym_class=model.sym_class,
        bulk=bulk_vals,
        edge=edge_vals,
        equal=equal,
        diagnostics=diagnostics,
    )


# ---- parameter sweeps -------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    status: str              # "equal" | "unequal" | "gapless" | "model-error" | "numerical-error"
    message: str
    report: CorrespondenceReport | None


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("TOPOBAND_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _sweep_one(family, p, n, grid) -> SweepRow:
    try:
        report = verify(family(p), n=n, grid=grid)
    except Gapless as exc:
        return SweepRow(parameter=p, status="gapless", message=str(exc), report=None)
    except ModelError as exc:
        return SweepRow(
            parameter=p, status="model-error",
            message=f"{type(exc).__name__}: {exc}", report=None,
        )
    except NumericalError as exc:
        return SweepRow(
            parameter=p, status="numerical-error",
            message=f"{type(exc).__name__}: {exc}", report=None,
        )
    status = "equal" if report.equal else "unequal"
    return SweepRow(parameter=p, status=status, message="", report=report)


def sweep(family, parameters, n: int = 60, grid: int = 721,
          threads: int | None = None) -> list:
    """verify() across a parameterized family; one row per parameter.

    Rows never raise: gapless parameters and per-row failures are
    carried as status + message.  Execution may be concurrent (capped
    by TOPOBAND_THREADS); the returned order always matches the input.
    """
    params = list(parameters)
    if not params:
        return []
    workers = min(_thread_count(threads), len(params))
    if workers == 1:
        return [_sweep_one(family, p, n, grid) for p in params]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_one, family, p, n, grid) for p in params]
        return [f.result() for f in futures]


def sweep_summary(rows) -> dict:
    counts = {"equal": 0, "unequal": 0, "gapless": 0,
              "model-error": 0, "numerical-error": 0}
    for row in rows:
        counts[row.status] = counts.get(row.status, 0) + 1
    return counts
