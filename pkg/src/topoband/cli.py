"""Command-line front end.

Subcommands: invariant, edge, verify, sweep.  Exit codes: 0 success,
2 model/input error, 3 numerical failure, 4 correspondence mismatch
(verify only).  Outputs are deterministic: fixed field order and
17-significant-digit floats, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import bulk_invariants as bulk
from . import correspondence, edge_invariants, edge_spectrum
from .errors import ModelError, NumericalError, ParseError, SchemaError
from .models import BulkModel, gap_report, model_from_dict, model_to_dict
from .presets import FAMILIES

TOLERANCES = {
    "gap_min": 1e-6,
    "edge_weight_min": 0.9,
    "zero_mode_window": 1e-8,
    "slope_min": 1e-6,
}


def _sign_tag() -> str:
    return (
        f"qwz-m1:fh{bulk.FH_SIGN:+d}"
        f",preimage{bulk.PREIMAGE_SIGN:+d}"
        f",great-circle{bulk.GREAT_CIRCLE_SIGN:+d}"
    )


# ---- deterministic serialization --------------------------------------------


def _jsonable(obj):
    """Recursively map to JSON-safe python types; complex becomes [re, im]."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return [z.real, z.imag]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _emit_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {_emit_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        if flat and len(obj) <= 8:
            return "[" + ", ".join(_emit_json(v) for v in obj) + "]"
        items = [f"{inner}{_emit_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".topoband-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _deliver(text: str, output: str | None) -> None:
    if output:
        _atomic_write(output, text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _metadata(**extra) -> dict:
    meta = {
        "tool": "topoband",
        "version": __version__,
        "sign_calibration": _sign_tag(),
        "tolerances": dict(TOLERANCES),
    }
    meta.update(extra)
    return meta


# ---- model ingestion ---------------------------------------------------------


def load_model(path: str) -> BulkModel:
    """Read and validate a model file; ParseError carries line context."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return model_from_dict(data)


def _load_family(path: str):
    try:
        with open(path, "r") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise SchemaError("family file must contain a JSON object")
    name = data.get("family")
    if name not in FAMILIES:
        raise SchemaError(f"family must be one of {sorted(FAMILIES)}, got {name!r}")
    values = data.get("values")
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) for v in values
    ):
        raise SchemaError("family file needs a numeric 'values' list")
    fixed = data.get("fixed", {})
    if not isinstance(fixed, dict):
        raise SchemaError("'fixed' must be an object of keyword overrides")
    base = FAMILIES[name]

    def family(p):
        return base(p, **fixed) if fixed else base(p)

    return name, family, [float(v) for v in values]


# ---- subcommands -------------------------------------------------------------

_METHODS = (
    "auto",
    "winding",
    "zero-count",
    "fh",
    "north-preimage",
    "great-circle",
    "band-edge",
    "incipience",
    "km",
    "m-parity",
)


def _invariant_value(model: BulkModel, method: str, grid: int | None):
    if method == "auto":
        method = {"AIII": "winding", "A": "fh", "AII": "km"}[model.sym_class]
    kw = {} if grid is None else {"grid": grid}
    if method == "winding":
        r = bulk.winding_chiral(model, **kw)
    elif method == "fh":
        r = bulk.chern_fh(model, **kw)
    elif method == "north-preimage":
        r = bulk.chern_north_preimage(model, **kw)
    elif method == "great-circle":
        r = bulk.chern_great_circle(model, **kw)
    elif method == "km":
        r = bulk.km_dirac(model)
    elif method == "zero-count":
        return method, edge_invariants.chiral_zero_count(model), {}
    elif method == "m-parity":
        return method, correspondence.m_parity(model), {}
    elif method == "band-edge":
        value, diag = edge_invariants._band_edge_crossings(
            model, grid=grid or 4096, k1_grid=1024
        )
        return method, value, diag
    elif method == "incipience":
        pts = edge_spectrum.incipience_points_singular(model, **kw)
        diag = {"points": [{"k": list(p.k), "sign": p.sign, "energy": p.energy}
                           for p in pts]}
        return method, sum(p.sign for p in pts), diag
    else:
        raise SchemaError(f"unknown method {method!r}")
    return r.method, r.value, r.diagnostics


def _cmd_invariant(args) -> int:
    model = load_model(args.model)
    method, value, diagnostics = _invariant_value(model, args.method, args.grid)
    out = {
        "command": "invariant",
        "model": os.path.basename(args.model),
        "method": method,
        "value": value,
        "diagnostics": _jsonable(diagnostics),
        "metadata": _metadata(grid=args.grid),
    }
    _deliver(_emit_json(_jsonable(out)) + "\n", args.output)
    return 0


def _edge_rows(branches):
    rows = []
    for br in branches.branches:
        for k2, e, w in zip(br.k2, br.energy, br.weight):
            rows.append((float(np.mod(k2, 2.0 * np.pi)), float(e), br.side, float(w)))
    return rows


def _cmd_edge(args) -> int:
    model = load_model(args.model)
    branches = edge_spectrum.strip_edge_branches(model, n=args.n, grid=args.grid)
    rows = _edge_rows(branches)
    if args.format == "csv":
        lines = ["k2,E,side,weight"]
        lines += [
            f"{_fmt_float(k2)},{_fmt_float(e)},{side},{_fmt_float(w)}"
            for k2, e, side, w in rows
        ]
        text = "\n".join(lines) + "\n"
    else:
        out = {
            "command": "edge",
            "model": os.path.basename(args.model),
            "branches": [
                {
                    "side": br.side,
                    "closed": br.closed,
                    "points": [
                        [float(np.mod(k2, 2.0 * np.pi)), float(e), float(w)]
                        for k2, e, w in zip(br.k2, br.energy, br.weight)
                    ],
                }
                for br in branches.branches
            ],
            "metadata": _metadata(grid=args.grid, n_cells=args.n),
        }
        text = _emit_json(_jsonable(out)) + "\n"
    _deliver(text, args.output)
    if args.plot:
        if not args.output:
            raise SchemaError("--plot needs --output to place the figure")
        from .plotting import save_edge_figure

        fig_path = os.path.splitext(args.output)[0] + ".png"
        save_edge_figure(fig_path, branches, fermi=gap_report(model).fermi_level)
    return 0


def _report_dict(report) -> dict:
    return {
        "class": report.sym_class,
        "bulk": {k: int(v) for k, v in report.bulk.items()},
        "edge": {k: int(v) for k, v in report.edge.items()},
        "equal": report.equal,
        "diagnostics": _jsonable(report.diagnostics),
    }


def _cmd_verify(args) -> int:
    model = load_model(args.model)
    report = correspondence.verify(model, n=args.n, grid=args.grid)
    out = {
        "command": "verify",
        "model": os.path.basename(args.model),
        **_report_dict(report),
        "metadata": _metadata(grid=args.grid, n_cells=args.n),
    }
    _deliver(_emit_json(_jsonable(out)) + "\n", args.output)
    if not report.equal:
        print("correspondence FAILED: bulk and edge indices disagree", file=sys.stderr)
        return 4
    return 0


def _fmt_indexdict(d: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in d.items())


def _cmd_sweep(args) -> int:
    name, family, values = _load_family(args.family)
    rows = correspondence.sweep(
        family, values, n=args.n, grid=args.grid, threads=args.threads
    )
    if args.format == "csv":
        lines = ["parameter,status,equal,bulk,edge,message"]
        for row in rows:
            if row.report is None:
                lines.append(
                    f"{_fmt_float(row.parameter)},{row.status},,,,"
                    f"{row.message.replace(',', ';')}"
                )
            else:
                lines.append(
                    f"{_fmt_float(row.parameter)},{row.status},"
                    f"{str(row.report.equal).lower()},"
                    f"{_fmt_indexdict(row.report.bulk)},"
                    f"{_fmt_indexdict(row.report.edge)},"
                )
        text = "\n".join(lines) + "\n"
    else:
        out = {
            "command": "sweep",
            "family": name,
            "rows": [
                {
                    "parameter": row.parameter,
                    "status": row.status,
                    "message": row.message,
                    "report": None if row.report is None else _report_dict(row.report),
                }
                for row in rows
            ],
            "summary": correspondence.sweep_summary(rows),
            "metadata": _metadata(grid=args.grid, n_cells=args.n),
        }
        text = _emit_json(_jsonable(out)) + "\n"
    _deliver(text, args.output)
    if args.plot:
        if not args.output:
            raise SchemaError("--plot needs --output to place the figure")
        from .plotting import save_sweep_figure

        save_sweep_figure(os.path.splitext(args.output)[0] + ".png", rows)
    return 0


# ---- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoband",
        description="Bulk and edge topological invariants of nearest-neighbor "
        "tight-binding models, and their correspondence.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_inv = sub.add_parser("invariant", help="compute one topological index")
    p_inv.add_argument("model")
    p_inv.add_argument("--method", choices=_METHODS, default="auto")
    p_inv.add_argument("--grid", type=int, default=None)
    p_inv.add_argument("-o", "--output", default=None)
    p_inv.set_defaults(func=_cmd_invariant)

    p_edge = sub.add_parser("edge", help="strip edge-branch data (k2,E,side,weight)")
    p_edge.add_argument("model")
    p_edge.add_argument("--n", type=int, default=60, help="strip cells")
    p_edge.add_argument("--grid", type=int, default=721, help="k2 nodes")
    p_edge.add_argument("--format", choices=("csv", "json"), default="csv")
    p_edge.add_argument("-o", "--output", default=None)
    p_edge.add_argument("--plot", action="store_true",
                        help="also render a figure next to the output file")
    p_edge.set_defaults(func=_cmd_edge)

    p_ver = sub.add_parser("verify", help="bulk vs edge correspondence report")
    p_ver.add_argument("model")
    p_ver.add_argument("--n", type=int, default=60)
    p_ver.add_argument("--grid", type=int, default=721)
    p_ver.add_argument("-o", "--output", default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_sw = sub.add_parser("sweep", help="verify across a parameter family")
    p_sw.add_argument("family", help="JSON: {family, values, fixed?}")
    p_sw.add_argument("--n", type=int, default=60)
    p_sw.add_argument("--grid", type=int, default=721)
    p_sw.add_argument("--threads", type=int, default=None)
    p_sw.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sw.add_argument("-o", "--output", default=None)
    p_sw.add_argument("--plot", action="store_true",
                      help="also render a figure next to the output file")
    p_sw.set_defaults(func=_cmd_sweep)
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
