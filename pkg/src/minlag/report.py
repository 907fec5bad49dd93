"""Machine-readable reports and field exports."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import os

import numpy as np

from . import __version__, geometry
from .errors import DomainError, PreconditionError
from .surface import SurfaceSpec

SCHEMA = 1
EXPORT_FIELDS = ("C", "K", "u", "H", "sigma2", "position")
POSITION_COLUMNS = ("x1", "x2", "x3", "y1", "y2", "y3")


def timestamp() -> str:
    """UTC time in ISO format; SOURCE_DATE_EPOCH pins it for reproducible reports."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc)
    else:
        moment = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
    return moment.isoformat()


def header(kind: str) -> dict:
    return {"schema": SCHEMA, "kind": kind, "tool": "minlag", "version": __version__, "timestamp": timestamp()}


def _clean(x):
    """JSON-safe copy: numpy scalars to Python floats, non-finite floats to strings."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else repr(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    # json writes floats with the shortest repr that round-trips exactly
    return json.dumps(_clean(obj), indent=2, sort_keys=False)


def checks_payload(checks) -> list:
    return [c.as_dict() for c in checks]


def surface_report(surface, nt: int, ns: int, checks, summaries: dict) -> dict:
    rep = header("surface")
    expects = surface.expects.as_dict() if isinstance(surface, SurfaceSpec) else {}
    rep.update(
        surface=surface.name,
        grid={"nt": nt, "ns": ns, "nodes": "midpoint"},
        expects=expects,
        invariants=[
            {"name": f"{c.suite}/{c.name}", "max_residual": c.max_residual, "tolerance": c.tolerance,
             "pass": c.passed, "detail": c.detail}
            for c in checks
        ],
        summaries=summaries,
        provenance={
            "jet_source": "analytic (truncated Taylor arithmetic through the chart)",
            "fd_steps": {"first": geometry.FD_STEP_FIRST, "second": geometry.FD_STEP_SECOND},
            "excluded_margins": {"fd_inset": 4 * geometry.FD_STEP_SECOND,
                                 "chart_margin": getattr(surface.domain, "margin", 0.0)},
        },
        passed=all(c.passed for c in checks),
    )
    return rep


def verify_report(suites, surfaces, tol_scale, checks) -> dict:
    rep = header("verify")
    rep.update(
        suites=list(suites),
        surfaces=None if surfaces is None else list(surfaces),
        tol_scale=tol_scale,
        checks=checks_payload(checks),
        passed=all(c.passed for c in checks),
    )
    return rep


# ----------------------------------------------------------------------------
# export
# ----------------------------------------------------------------------------


def parse_fields(text: str) -> list:
    fields = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fields if f not in EXPORT_FIELDS]
    if bad or not fields:
        raise DomainError(f"unknown export field(s) {bad or text!r}; choose from {', '.join(EXPORT_FIELDS)}")
    return fields


def export_nodes(surface: SurfaceSpec, nt: int, ns: int, chart: int = 0):
    """Node lattice for periodic charts, midpoint grid otherwise."""
    dom = surface.charts[chart].domain
    if dom.compact:
        T, S, _, _ = dom.nodes(nt, ns)
    else:
        T, S, _ = dom.grid(nt, ns)
    return T, S


def field_columns(surface: SurfaceSpec, fields, T, S, chart: int = 0) -> tuple:
    """(column names, 2-D arrays) of the requested fields on a grid."""
    names, cols = [], []
    forms = None
    for f in fields:
        if f == "position":
            X = surface.eval(T, S, chart)
            names.extend(POSITION_COLUMNS)
            cols.extend(X[..., k] for k in range(6))
            continue
        if f == "u":
            if not surface.charts[chart].domain.conformal:
                raise PreconditionError("u is only defined on conformal charts")
            E, _, _ = geometry.first_form(geometry.jet(surface, (T, S), chart=chart))
            names.append("u")
            cols.append(0.5 * np.log(E))
            continue
        if f == "C":
            names.append("C")
            cols.append(geometry.associated_jacobian(geometry.jet(surface, (T, S), chart=chart)))
            continue
        if forms is None:
            forms = geometry.second_form(surface, (T, S), "analytic", chart)
        names.append(f)
        cols.append({"K": forms.K, "H": forms.H_norm, "sigma2": forms.sigma2}[f])
    return names, cols


def _rows(T, S, cols):
    # s-major: s is the outer loop, t the inner one
    nt, ns = T.shape
    for j in range(ns):
        for i in range(nt):
            yield [T[i, j], S[i, j]] + [c[i, j] for c in cols]


def export_csv(surface: SurfaceSpec, fields, nt: int, ns: int, chart: int = 0) -> str:
    T, S = export_nodes(surface, nt, ns, chart)
    names, cols = field_columns(surface, fields, T, S, chart)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "s"] + names)
    for row in _rows(T, S, cols):
        w.writerow([f"{float(x):.17g}" for x in row])
    return buf.getvalue()


def export_json(surface: SurfaceSpec, fields, nt: int, ns: int, chart: int = 0) -> str:
    T, S = export_nodes(surface, nt, ns, chart)
    names, cols = field_columns(surface, fields, T, S, chart)
    rep = header("export")
    rep.update(surface=surface.name, chart=chart, grid={"nt": nt, "ns": ns}, order="s-major",
               columns=["t", "s"] + names, rows=[[float(x) for x in r] for r in _rows(T, S, cols)])
    return dumps(rep)


def read_csv_columns(text: str) -> dict:
    rows = list(csv.reader(io.StringIO(text)))
    head, body = rows[0], rows[1:]
    return {h: np.array([float(r[k]) for r in body]) for k, h in enumerate(head)}
