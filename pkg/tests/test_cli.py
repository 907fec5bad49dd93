import json
import math
import subprocess
import sys

import numpy as np
import pytest

from minlag import catalog, geometry, report, special
from minlag.cli import build_parser, load_config, main, settings_from, UsageError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog_listing(capsys):
    code, out, _ = run(["catalog"], capsys)
    assert code == 0
    names = {line.split()[0] for line in out.splitlines()}
    assert {"m0", "torus-t", "klein-b"} <= names


def test_catalog_json(capsys):
    code, out, _ = run(["catalog", "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["schema"] == 1 and data["kind"] == "catalog"
    entry = next(r for r in data["surfaces"] if r["name"] == "klein-b")
    assert entry["orientable"] is False and entry["gluing"] == "klein"


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["catalog", "--bogus"])
    assert info.value.code == 2
    proc = subprocess.run(["minlag", "catalog", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_analyze_m0(capsys):
    code, out, _ = run(["analyze", "--surface", "m0", "--nt", "64", "--ns", "64"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["summaries"]["C_min"] == pytest.approx(0.5, abs=1e-8)
    assert rep["summaries"]["C_max"] == pytest.approx(0.5, abs=1e-8)
    assert all(inv["pass"] == (inv["max_residual"] <= inv["tolerance"]) for inv in rep["invariants"])
    assert rep["grid"] == {"nt": 64, "ns": 64, "nodes": "midpoint"}
    assert "fd_steps" in rep["provenance"]


def test_analyze_klein_area(capsys, tmp_path):
    out_file = tmp_path / "b.json"
    code, _, _ = run(["analyze", "--surface", "klein-b", "--out", str(out_file)], capsys)
    rep = json.loads(out_file.read_text())
    target = 12 * math.pi * special.complete_E(special.KLEIN_MODULUS)
    assert code == 0
    assert abs(rep["summaries"]["area"] - target) / target <= 1e-4
    assert rep["summaries"]["area"] == pytest.approx(41.98, abs=0.01)


def test_analyze_constant_C_is_lagrangian_not_minimal(capsys):
    code, out, _ = run(["analyze", "--surface", "const-c:0.3"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["expects"]["minimal"] is False and rep["expects"]["lagrangian"] is True
    names = {i["name"] for i in rep["invariants"]}
    assert "lagrangian/omega-residual" in names
    assert not any(n.startswith("minimal/mean-curvature") for n in names)


def test_analyze_unknown_surface(capsys):
    code, _, err = run(["analyze", "--surface", "no-such-surface"], capsys)
    assert code == 2 and "unknown surface" in err


def test_verify_spectral_torus_index(capsys):
    code, out, _ = run(["verify", "--suite", "spectral", "--surface", "torus-t", "--json"], capsys)
    rep = json.loads(out)
    assert code == 0
    check = next(c for c in rep["checks"] if c["name"] == "orientable-index")
    assert "index=2" in check["detail"]


def test_verify_lagrangian_full_catalog(capsys):
    code, out, _ = run(["verify", "--suite", "lagrangian"], capsys)
    assert code == 0 and out.strip().endswith("0 failed")


def test_tolerance_scale_semantics(capsys):
    _, out1, _ = run(["verify", "--suite", "identities", "--surface", "klein-b", "--json"], capsys)
    _, out10, _ = run(["verify", "--suite", "identities", "--surface", "klein-b", "--json", "--tol-scale", "10"],
                      capsys)
    a, b = json.loads(out1), json.loads(out10)
    assert b["tol_scale"] == 10
    for c1, c10 in zip(a["checks"], b["checks"]):
        assert c10["tolerance"] == pytest.approx(10 * c1["tolerance"])
        assert c10["max_residual"] == c1["max_residual"]
        if c10["pass"]:
            assert c1["max_residual"] <= 10 * c1["tolerance"]


def test_verify_failure_exits_one(capsys, tmp_path):
    cfg = tmp_path / "strict.cfg"
    cfg.write_text("tol.lagrangian = 1e-30\n")
    code, out, _ = run(["verify", "--suite", "lagrangian", "--surface", "const-c:0.3", "--config", str(cfg)], capsys)
    assert code == 1 and "FAIL" in out


def test_verify_bad_suite(capsys):
    code, _, err = run(["verify", "--suite", "nonsense"], capsys)
    assert code == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nnt = 12\nns = 10\ntol_scale = 3\nworkers = 2\ngrid.flat = 16\ntol.minimal = 1e-5\n")
    args = build_parser().parse_args(["verify", "--config", str(cfg), "--nt", "20"])
    st = settings_from(args)
    assert st.grid("nt") == 20 and st.grid("ns") == 10 and st.grid("flat") == 16
    assert st.workers == 2 and st.tol("minimal") == pytest.approx(3e-5)
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        load_config(bad)


def test_config_honoured_by_analyze(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("nt = 8\nns = 6\n")
    _, out, _ = run(["analyze", "--surface", "torus-t", "--config", str(cfg)], capsys)
    assert json.loads(out)["grid"]["nt"] == 8


def test_export_round_trip_is_bitwise(capsys, tmp_path):
    path = tmp_path / "c.csv"
    code, _, _ = run(["export", "--surface", "klein-b", "--fields", "C,K", "--nt", "12", "--ns", "10",
                      "--out", str(path)], capsys)
    assert code == 0
    cols = report.read_csv_columns(path.read_text())
    B = catalog.make_klein_bottle_B()
    T, S = report.export_nodes(B, 12, 10)
    C = geometry.associated_jacobian(geometry.jet(B, (T, S)))
    # s-major order: transpose before flattening
    assert np.array_equal(cols["C"], C.T.ravel())
    assert np.array_equal(cols["t"], T.T.ravel()) and np.array_equal(cols["s"], S.T.ravel())


def test_export_klein_conformal_factor(capsys, tmp_path):
    path = tmp_path / "u.csv"
    run(["export", "--surface", "klein-b", "--fields", "u", "--nt", "16", "--ns", "4", "--out", str(path)], capsys)
    cols = report.read_csv_columns(path.read_text())
    dn = special.jacobi(math.sqrt(3) * cols["t"], special.KLEIN_MODULUS).dn
    np.testing.assert_allclose(cols["u"], 0.5 * np.log(6 * dn**2 + 2 / (3 * dn**2)), atol=1e-12)


def test_export_lawson_gauss_csv_and_json(capsys):
    code, out, _ = run(["export", "--surface", "lawson-gauss", "--fields", "C,K", "--format", "csv",
                        "--nt", "4", "--ns", "3"], capsys)
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "t,s,C,K" and len(rows) == 13
    code, out, _ = run(["export", "--surface", "m0", "--fields", "position,sigma2", "--format", "json",
                        "--nt", "3", "--ns", "3"], capsys)
    data = json.loads(out)
    assert data["columns"][:8] == ["t", "s", "x1", "x2", "x3", "y1", "y2", "y3"] and len(data["rows"]) == 9


def test_export_errors(capsys):
    assert run(["export", "--surface", "m0", "--fields", "C,bogus"], capsys)[0] == 2
    assert run(["export", "--surface", "const-c:0.3", "--fields", "u"], capsys)[0] == 2
    assert run(["export", "--surface", "lawson-tau31", "--fields", "C"], capsys)[0] == 2
    assert run(["export", "--surface", "m0", "--fields", "C", "--chart", "5"], capsys)[0] == 2


def test_spectral_command(capsys):
    code, out, _ = run(["spectral", "--surface", "torus-t", "--nt", "16"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["index"] == 2 and rep["kind"] == "spectral"
    assert run(["spectral", "--surface", "m0"], capsys)[0] == 2


def test_sinh_gordon_command(capsys, tmp_path):
    code, out, _ = run(["sinh-gordon", "--nodes", "64"], capsys)
    assert code == 0 and json.loads(out)["residual"] <= 1e-12
    path = tmp_path / "ode.csv"
    code, out, _ = run(["sinh-gordon", "--v0", "0.5493061443340549", "--length", "1", "--out", str(path)], capsys)
    assert code == 0 and json.loads(out)["first_integral_drift"] <= 1e-8
    assert path.read_text().startswith("t,v,u,C")
    code, _, _ = run(["sinh-gordon", "--v0", "20", "--length", "1"], capsys)
    assert code == 1


def test_reports_deterministic_with_source_date_epoch(monkeypatch, capsys):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    _, a, _ = run(["analyze", "--surface", "torus-t", "--nt", "8", "--ns", "8"], capsys)
    _, b, _ = run(["analyze", "--surface", "torus-t", "--nt", "8", "--ns", "8", "--workers", "1"], capsys)
    assert a == b
    assert json.loads(a)["timestamp"] == "2023-11-14T22:13:20+00:00"


def test_json_round_trip_is_lossless():
    values = {"x": 0.1 + 0.2, "y": [1e-300, math.pi, np.float64(2.5)], "z": np.int64(3)}
    back = json.loads(report.dumps(values))
    assert back == {"x": 0.1 + 0.2, "y": [1e-300, math.pi, 2.5], "z": 3}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minlag.cli", "catalog", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["tool"] == "minlag"
