import io
import json
import math
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

import aqs.report as report
import aqs.structures as structures
from aqs.cli import main
from aqs.report import (EXIT_IDENTITY, EXIT_INCONSISTENT, EXIT_MODULE, EXIT_OK, EXIT_SPEC,
                        ReportOptions, SpecError, dumps, parse_spec, plain, render, run_report,
                        spec_from_obj)
from aqs.structures import Check

SPECS = os.path.join(os.path.dirname(__file__), os.pardir, "specs")


def spec_path(name):
    return os.path.join(SPECS, name)


def lie(**kw):
    base = {"kind": "lie_algebra", "dim": 3, "brackets": []}
    base.update(kw)
    return base


@pytest.mark.parametrize("obj,path", [
    ([], "$"),
    ({}, "$.kind"),
    ({"kind": "torus"}, "$.kind"),
    (lie(scalars="complex"), "$.scalars"),
    (lie(dim=0), "$.dim"),
    (lie(brackets=[[0, 1, 2, 0.5]]), "$.brackets[0][3]"),
    (lie(brackets=[[0, 1, 3, "1"]]), "$.brackets[0][2]"),
    (lie(brackets=[[1, 1, 0, "1"]]), "$.brackets[0]"),
    (lie(brackets=[[0, 1, "1"]]), "$.brackets[0]"),
    (lie(metric=[[1, 0], [0, 1]]), "$.metric"),
    (lie(structures=[{"phi": [[0] * 3] * 3, "psi": 1}]), "$.structures[0].psi"),
    (lie(structures=[{"name": "a", "phi": [[0] * 3] * 3}, {"name": "a", "phi": [[0] * 3] * 3}]),
     "$.structures[1].name"),
    (lie(color="red"), "$.color"),
    ({"kind": "patch_builtin", "builtin": "sphere"}, "$.builtin"),
    ({"kind": "patch_builtin", "builtin": "disc_bundle", "params": {"c": "1"}}, "$.params.c"),
    ({"kind": "patch_builtin", "builtin": "disc_bundle", "points": 0}, "$.points"),
    ({"kind": "patch_builtin", "builtin": "flat_disco", "params": {"n": 1, "p": 2}}, "$.params.p"),
    ({"kind": "patch_builtin", "builtin": "heisenberg", "params": {"weights": []}},
     "$.params.weights"),
    ({"kind": "patch_builtin", "builtin": "heisenberg", "scalars": "float"}, "$.scalars"),
    ({"kind": "product", "children": [lie()]}, "$.children"),
    ({"kind": "product", "children": [lie(), lie(dim=3, structures=[{"phi": [[0] * 3] * 3}])]},
     "$.children[1].dim"),
    ({"kind": "product", "children": [lie(), lie(brackets=[[0, 1, 2, "1"]])]}, "$.children[1]"),
])
def test_spec_errors_carry_field_paths(obj, path):
    with pytest.raises(SpecError) as info:
        spec_from_obj(obj)
    assert info.value.path == path


def test_invalid_json():
    with pytest.raises(SpecError) as info:
        parse_spec("{nope")
    assert info.value.path == "$"


def test_rational_and_float_scalars():
    s = spec_from_obj(lie(brackets=[[0, 1, 2, "2/4"]]))
    assert s.brackets[0][3] == "1/2"
    s = spec_from_obj(lie(scalars="float", brackets=[[0, 1, 2, 0.25]]))
    assert s.brackets[0][3] == 0.25
    with pytest.raises(SpecError):
        spec_from_obj(lie(scalars="float", brackets=[[0, 1, 2, "inf"]]))


def test_main_exit_codes(tmp_path, capsys):
    assert main(["classify", "--spec", spec_path("heisenberg5.json"), "--out",
                 str(tmp_path / "a.json")]) == EXIT_OK
    assert main(["classify", "--spec", spec_path("bad_jacobi.json"),
                 "--out", str(tmp_path / "b.json")]) == EXIT_MODULE
    err = json.loads((tmp_path / "b.json").read_text())["summary"]["errors"]
    assert err[0]["where"] == "build" and "Jacobi" in err[0]["message"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(lie(brackets=[[0, 1, 2, 1.5]])))
    assert main(["classify", "--spec", str(bad)]) == EXIT_SPEC
    assert "$.brackets[0][3]" in capsys.readouterr().err
    assert main(["classify", "--spec", str(tmp_path / "missing.json")]) == EXIT_SPEC


def test_identity_and_inconsistency_exit_codes(monkeypatch, tmp_path):
    out = str(tmp_path / "r.json")
    real = report.identity_suite

    def broken(s):
        d = real(s)
        d["dPhi_zero"] = Check(False, 1)
        return d

    monkeypatch.setattr(report, "identity_suite", broken)
    assert main(["report", "--builtin", "heisenberg", "--weights", "1", "--out", out]) == EXIT_IDENTITY
    monkeypatch.setattr(report, "identity_suite", real)
    monkeypatch.setattr(structures, "consistency_violations", lambda flags: ["forced"])
    assert main(["classify", "--builtin", "heisenberg", "--out", out]) == EXIT_INCONSISTENT
    assert json.loads(open(out).read())["summary"]["inconsistencies"]


def test_stdin_and_stdout(monkeypatch, capsys):
    text = open(spec_path("heisenberg5.json")).read()
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    assert main(["spectrum", "--spec", "-"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["structures"]["phi1"]["spectrum"] == [[-1.0, 4], [0.0, 1]]


def test_report_is_deterministic():
    spec = parse_spec(open(spec_path("heisenberg5.json")).read())
    a = render(run_report(spec, ReportOptions("report")))
    b = render(run_report(spec, ReportOptions("report")))
    assert a == b
    data = json.loads(a)
    assert data["structures"]["phi1"]["classification"]["flags"]["anti_quasi_sasakian"]
    assert "identities" in data["structures"]["phi1"]
    assert "identities" not in data["structures"]["phi3"]
    assert data["summary"]["exit_code"] == EXIT_OK


def test_heisenberg_builtin_flags_ricci_discrepancy(tmp_path):
    out = tmp_path / "h.json"
    assert main(["classify", "--builtin", "heisenberg", "--weights", "1,2", "--out", str(out)]) == 0
    ric = json.loads(out.read_text())["triple"]["ric_xi_xi"]
    assert ric["computed"] == "20" and ric["expected_4_sum_sq"] == "20"
    assert ric["tabulated_minus_8_sum_sq"] == "-40" and ric["discrepancy_with_tabulated"]


def test_disc_spectrum_rows(tmp_path):
    out = tmp_path / "d.json"
    assert main(["spectrum", "--builtin", "disc_bundle", "--c", "-8", "--points", "5",
                 "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["structures"]["disc_bundle"]["spectrum"]
    assert len(rows) == 5
    for r in rows:
        quad = [v for v, m in r["psi_sq"] if m == 4][0]
        assert math.isclose(quad, r["expected_minus_lambda_sq"], rel_tol=1e-9)


def test_product_spec_decomposes():
    spec = parse_spec(open(spec_path("heisenberg_x_flat2.json")).read())
    data = run_report(spec, ReportOptions("decompose"))
    d = data["structures"]["phi1 x flat2"]["decomposition"]
    assert d["ok"] and d["aqs"]["dim"] == 5 and d["kahler"]["dim"] == 2


def test_patch_decompose_is_skipped():
    spec = spec_from_obj({"kind": "patch_builtin", "builtin": "flat_disco", "points": 2})
    data = run_report(spec, ReportOptions("decompose"))
    assert "skipped" in data["structures"]["flat_disco"]["decomposition"]


def test_dumps_format():
    s = dumps(plain({"b": 1.0, "a": [0.1, 2, "x"], "c": {"z": None, "y": True}}))
    assert s.index('"a"') < s.index('"b"') < s.index('"c"')
    assert "0.10000000000000001" in s and "1.0" in s
    assert dumps(float("nan")) == '"nan"'


json_leaf = st.one_of(st.none(), st.booleans(), st.integers(-10**6, 10**6),
                      st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=5))
json_tree = st.recursive(json_leaf, lambda ch: st.one_of(
    st.lists(ch, max_size=3), st.dictionaries(st.text(max_size=4), ch, max_size=3)), max_leaves=10)


@given(json_tree)
def test_dumps_round_trips(obj):
    assert json.loads(dumps(obj)) == obj
