"""``minlag`` command line: catalog, analyze, verify, export, spectral, sinh-gordon.

Exit codes: 0 all checks pass, 1 verification failure, 2 usage or unknown input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import catalog, report, sinh_gordon, spectral, suites
from .catalog import R4Immersion
from .errors import AmbiguityError, ConvergenceError, DomainError, MinlagError, PreconditionError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CONFIG_KEYS = {"nt", "ns", "workers", "tol_scale"}


class UsageError(Exception):
    pass


def load_config(path) -> dict:
    """Parse a key=value file (``#`` comments).  Keys: nt, ns, workers, tol_scale, tol.<name>, grid.<name>."""
    out = {}
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        prefix, _, name = key.partition(".")
        if key in CONFIG_KEYS:
            pass
        elif prefix == "tol" and name in suites.DEFAULT_TOLERANCES:
            pass
        elif prefix == "grid" and name in suites.DEFAULT_GRIDS:
            pass
        else:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {key} needs a number") from exc
    return out


def settings_from(args) -> suites.Settings:
    """Built-in defaults, overridden by the config file, overridden by flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    st = suites.Settings()
    for key, val in cfg.items():
        prefix, _, name = key.partition(".")
        if prefix == "tol":
            st.tolerances[name] = val
        elif prefix == "grid":
            st.grids[name] = int(val) if float(val).is_integer() and name != "sg_step" else val
    if "nt" in cfg:
        st.grids["nt"] = int(cfg["nt"])
    if "ns" in cfg:
        st.grids["ns"] = int(cfg["ns"])
    st.tol_scale = cfg.get("tol_scale", 1.0)
    st.workers = int(cfg["workers"]) if "workers" in cfg else None
    if getattr(args, "nt", None) is not None:
        st.grids["nt"] = args.nt
    if getattr(args, "ns", None) is not None:
        st.grids["ns"] = args.ns
    if getattr(args, "tol_scale", None) is not None:
        st.tol_scale = args.tol_scale
    if getattr(args, "workers", None) is not None:
        st.workers = args.workers
    if st.workers is None:
        st.workers = os.cpu_count() or 1
    if st.tol_scale <= 0 or st.workers < 1:
        raise UsageError("--tol-scale must be positive and --workers at least 1")
    return st


def _resolve(name):
    try:
        return catalog.get(name)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _check_line(c) -> str:
    flag = "PASS" if c.passed else "FAIL"
    line = f"{flag}  {c.suite}/{c.name}  {c.surface}  residual={c.max_residual:.6g}  tol={c.tolerance:.6g}"
    return line + (f"  ({c.detail})" if c.detail else "")


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    rows = []
    for name in catalog.names():
        obj = catalog.get(name)
        if isinstance(obj, R4Immersion):
            props = {"kind": "r4", "in_S3": obj.in_S3, "minimal": obj.minimal, "genus": obj.genus}
        else:
            props = {"kind": "s2xs2", "gluing": obj.domain.gluing, **obj.expects.as_dict()}
        rows.append({"name": name, **props})
    if args.json:
        rep = report.header("catalog")
        rep["surfaces"] = rows
        _emit(report.dumps(rep), None)
    else:
        for r in rows:
            extras = " ".join(f"{k}={v}" for k, v in r.items() if k != "name")
            print(f"{r['name']:<28} {extras}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    st = settings_from(args)
    surf = _resolve(args.surface)
    tasks = suites.build_tasks(("lagrangian", "minimal", "identities", "gaussmap"), [surf.name], st)
    checks = suites.run_tasks(tasks, st.workers)
    summ = suites.summaries(surf, st)
    rep = report.surface_report(surf, st.grid("nt"), st.grid("ns"), checks, summ)
    _emit(report.dumps(rep), args.out)
    for c in checks:
        print(_check_line(c), file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def _split_multi(values):
    out = []
    for v in values or []:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def cmd_verify(args) -> int:
    st = settings_from(args)
    chosen = _split_multi(args.suite) or list(suites.SUITES)
    bad = [s for s in chosen if s not in suites.SUITES]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}; choose from {', '.join(suites.SUITES)}")
    surfaces = _split_multi(args.surface) or None
    if surfaces:
        for name in surfaces:
            _resolve(name)
    tasks = suites.build_tasks(chosen, surfaces, st)
    if not tasks:
        raise UsageError("no applicable checks for this suite and surface selection")
    checks = suites.run_tasks(tasks, st.workers)
    rep = report.verify_report(chosen, surfaces, st.tol_scale, checks)
    if args.json or args.out:
        _emit(report.dumps(rep), args.out)
    stream = sys.stderr if (args.json and not args.out) else sys.stdout
    for c in checks:
        print(_check_line(c), file=stream)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks)} checks, {failed} failed", file=stream)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_export(args) -> int:
    st = settings_from(args)
    surf = _resolve(args.surface)
    if isinstance(surf, R4Immersion):
        raise UsageError("export works on S^2 x S^2 surfaces only")
    try:
        fields = report.parse_fields(args.fields)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 <= args.chart < len(surf.charts):
        raise UsageError(f"{surf.name} has {len(surf.charts)} chart(s)")
    nt, ns = st.grid("nt"), st.grid("ns")
    try:
        if args.format == "csv":
            text = report.export_csv(surf, fields, nt, ns, args.chart)
        else:
            text = report.export_json(surf, fields, nt, ns, args.chart)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    _emit(text, args.out)
    return EXIT_OK


def cmd_spectral(args) -> int:
    surf = _resolve(args.surface)
    if isinstance(surf, R4Immersion):
        raise UsageError("spectral runs need an S^2 x S^2 surface")
    ns = args.ns if args.ns is not None else args.nt
    try:
        rep = spectral.spectral_report(surf, args.nt, ns, args.margin)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    out = report.header("spectral")
    out.update(rep)
    _emit(report.dumps(out), args.out)
    return EXIT_OK


def cmd_sinh_gordon(args) -> int:
    if args.v0 is None:
        f = sinh_gordon.lawson_field(args.nodes)
        res = sinh_gordon.sg_residual(f, analytic=True)
    else:
        length = args.length if args.length is not None else sinh_gordon.lawson_period()
        f = sinh_gordon.integrate_reduced(args.v0, args.dv0, length, args.step)
        res = sinh_gordon.sg_residual(f, analytic=True)
    rec = sinh_gordon.reconstruct(f)
    drift = sinh_gordon.first_integral_drift(f)
    if args.out:
        sinh_gordon.write_csv(args.out, f, rec)
    summary = {"nodes": int(f.v.shape[0]), "residual": res, "compatibility": rec.compat_residual,
               "first_integral_drift": drift}
    print(json.dumps({k: (float(v) if isinstance(v, float) else v) for k, v in summary.items()}))
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minlag", description="Verify minimal Lagrangian surfaces in S^2 x S^2.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("--config", help="key=value file overriding default grids and tolerances")
        sp.add_argument("--workers", type=_positive_int, help="worker threads (default: logical processors)")
        if grid:
            sp.add_argument("--nt", type=_positive_int, help="grid nodes along t")
            sp.add_argument("--ns", type=_positive_int, help="grid nodes along s")

    c = sub.add_parser("catalog", help="list catalog surfaces")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_catalog)

    a = sub.add_parser("analyze", help="run every applicable analyzer on one surface")
    a.add_argument("--surface", required=True)
    a.add_argument("--out", help="write the JSON report here instead of stdout")
    common(a)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", action="append", help=f"one of {', '.join(suites.SUITES)} (repeatable)")
    v.add_argument("--surface", action="append", help="restrict to these surfaces (repeatable)")
    v.add_argument("--tol-scale", type=float, help="multiply every tolerance")
    v.add_argument("--json", action="store_true", help="print the JSON report")
    v.add_argument("--out", help="write the JSON report here")
    common(v)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="write fields on a grid")
    e.add_argument("--surface", required=True)
    e.add_argument("--fields", required=True, help=f"comma list from {', '.join(report.EXPORT_FIELDS)}")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--chart", type=int, default=0)
    e.add_argument("--out")
    common(e)
    e.set_defaults(func=cmd_export)

    s = sub.add_parser("spectral", help="spectral report and index counts")
    s.add_argument("--surface", required=True)
    s.add_argument("--nt", type=_positive_int, default=64)
    s.add_argument("--ns", type=_positive_int)
    s.add_argument("--margin", type=float, default=spectral.SPECTRAL_MARGIN)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectral)

    g = sub.add_parser("sinh-gordon", help="Lawson solution or reduced-ODE integration")
    g.add_argument("--v0", type=float, help="initial value; omit for the closed-form Lawson solution")
    g.add_argument("--dv0", type=float, default=0.0)
    g.add_argument("--length", type=float)
    g.add_argument("--step", type=float, default=sinh_gordon.DEFAULT_STEP)
    g.add_argument("--nodes", type=_positive_int, default=512)
    g.add_argument("--out", help="CSV with columns t, v, u, C")
    g.set_defaults(func=cmd_sinh_gordon)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"minlag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AmbiguityError, ConvergenceError) as exc:
        print(f"minlag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except MinlagError as exc:
        print(f"minlag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
