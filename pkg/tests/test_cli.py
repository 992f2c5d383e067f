import json

import pandas as pd
import pytest

from ui.cli import read_points, read_web, run_cli
from webgeom.base.errors import UsageError
from webgeom.exprlang import parse_web

import tests.conftest as shared
from tests.conftest import WEB_DIR

AFFINE = str(WEB_DIR / "affine_group.web")
PARALLEL = str(WEB_DIR / "parallel.web")
GENERIC = str(WEB_DIR / "generic_cubic.web")

# (web file, point, floats compared exactly)
GOLDEN_WEBS = {
    "parallel": (PARALLEL, "0.3,0.2,0.5,0.4", True),
    "affine_group": (AFFINE, "1,0,1,0", False),
    "generic_cubic": (GENERIC, "0.3,0.2,0.5,0.4", False),
}


def test_characters_all_reports_non_involutive(capsys, golden):
    code = run_cli(["characters", "--scenario", "all", "--json"])
    out = capsys.readouterr().out
    assert code == 1
    payload = json.loads(out)
    assert [t["scenario"] for t in payload["tables"]] == ["thm3", "thm7", "thm8", "s22"]
    assert payload["unconstrained"]["N"] == 40
    assert payload["unconstrained"]["stated_N"] == 26
    golden("characters_all.json", out)


def test_characters_single_involutive_scenario(capsys):
    assert run_cli(["characters", "--scenario", "thm3"]) == 0
    out = capsys.readouterr().out
    assert "thm3" in out
    assert "unconstrained" not in out


def test_unknown_scenario(capsys):
    assert run_cli(["characters", "--scenario", "bogus"]) == 64
    assert "UNKNOWN_SCENARIO" in capsys.readouterr().err


def test_unconstrained_scenario_has_no_table(capsys):
    assert run_cli(["characters", "--scenario", "none"]) == 64
    assert "UNKNOWN_SCENARIO" in capsys.readouterr().err


def test_missing_web_is_usage_error(capsys):
    assert run_cli(["analyze", "--point", "1,0,1,0"]) == 64
    assert "USAGE_ERROR" in capsys.readouterr().err


def test_point_and_points_are_exclusive(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0", "--points", "p.txt"]) == 64


def test_parse_error_exits_three(tmp_path, capsys):
    web = tmp_path / "bad.web"
    web.write_text("f1 = x1 + x3\nf2 = y2\n", encoding="utf-8")
    assert run_cli(["analyze", "--web", str(web), "--point", "0,0,0,0"]) == 3
    assert "UNKNOWN_VARIABLE" in capsys.readouterr().err


def test_bad_point_exits_three(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1"]) == 3
    assert "ARITY_ERROR" in capsys.readouterr().err


def test_degenerate_point_exits_two(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "0,0,1,0"]) == 2
    captured = capsys.readouterr()
    assert "NOT_A_WEB_AT_POINT" in captured.err
    assert captured.out == ""


def test_analyze_text_report(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0"]) == 0
    out = capsys.readouterr().out
    assert "web: affine_group" in out
    assert "Δ principal" in out
    assert "conditions holding:" in out


def test_analyze_json_report(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0", "--json"]) == 0
    out = capsys.readouterr().out
    report = json.loads(out)
    assert report["web"] == "affine_group"
    assert report["point"] == [1.0, 0.0, 1.0, 0.0]
    assert report["principal_bivector"]["flag"] is True
    assert report["tensors"] is None


def test_dump_tensors_implies_json(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0", "--dump-tensors"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["tensors"]) == {"pipeline", "specialized"}


def test_json_output_is_deterministic(capsys):
    argv = ["analyze", "--web", AFFINE, "--point", "1.5,0.2,0.7,-0.3", "--json"]
    run_cli(argv)
    first = capsys.readouterr().out
    run_cli(argv)
    assert capsys.readouterr().out == first


def test_tol_classify_override(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0", "--json", "--tol-classify", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["tolerances"]["tol_classify"] == 0.5


def test_non_positive_tolerance_is_config_error(capsys):
    assert run_cli(["analyze", "--web", AFFINE, "--point", "1,0,1,0", "--tol-classify", "0"]) == 64
    assert "CONFIG_ERROR" in capsys.readouterr().err


def test_batch_with_csv(tmp_path, capsys):
    points = tmp_path / "points.txt"
    points.write_text("# x1,x2,y1,y2\n1,0,1,0\n\n0,0,1,0\n1.5,0.2,0.7,-0.3\n", encoding="utf-8")
    summary = tmp_path / "summary.csv"
    code = run_cli(["analyze", "--web", AFFINE, "--points", str(points), "--csv", str(summary)])
    captured = capsys.readouterr()
    assert code == 2
    assert "NOT_A_WEB_AT_POINT" in captured.err
    frame = pd.read_csv(summary)
    assert len(frame) == 3
    assert frame["error"].isna().tolist() == [True, False, True]
    assert frame["principal"].iloc[0]


def test_batch_json_keeps_order(tmp_path, capsys):
    points = tmp_path / "points.txt"
    points.write_text("1,0,1,0\n0,0,1,0\n", encoding="utf-8")
    run_cli(["analyze", "--web", AFFINE, "--points", str(points), "--json"])
    reports = json.loads(capsys.readouterr().out)
    assert reports[0]["web"] == "affine_group"
    assert reports[1]["point"] == [0.0, 0.0, 1.0, 0.0]
    assert "NOT_A_WEB_AT_POINT" in reports[1]["error"]


def test_verify_parallel_web(capsys):
    assert run_cli(["verify", "--web", PARALLEL, "--point", "0.3,0.2,0.5,0.4"]) == 0
    assert "checks passed: VALID" in capsys.readouterr().out


def test_verify_with_injection_fails(capsys):
    code = run_cli(["verify", "--web", PARALLEL, "--point", "0.3,0.2,0.5,0.4", "--inject", "b1112=+1", "--json"])
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    assert not report["is_valid"]
    assert report["injected"] == ["b1112=+1"]


def test_verify_rejects_negative_seeds(capsys):
    assert run_cli(["verify", "--web", PARALLEL, "--point", "0,0,0,0", "--seeds", "-1"]) == 64


def test_read_web_names_unnamed_web(tmp_path):
    path = tmp_path / "plain.web"
    path.write_text("f1 = x1 + y1\nf2 = x2 + y2\n", encoding="utf-8")
    assert read_web(str(path)).name == "plain"


def test_read_missing_files(tmp_path):
    with pytest.raises(UsageError):
        read_web(str(tmp_path / "missing.web"))
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n\n", encoding="utf-8")
    with pytest.raises(UsageError):
        read_points(str(empty))


@pytest.mark.parametrize("name", sorted(GOLDEN_WEBS))
def test_analyze_matches_golden(name, capsys, golden):
    path, point, exact = GOLDEN_WEBS[name]
    assert run_cli(["analyze", "--web", path, "--point", point, "--json"]) == 0
    golden(f"{name}_analyze.json", capsys.readouterr().out, exact=exact)


def test_analyze_json_echoes_definition(capsys):
    assert run_cli(["analyze", "--web", GENERIC, "--point", "0.3,0.2,0.5,0.4", "--json"]) == 0
    definition = json.loads(capsys.readouterr().out)["definition"]
    assert definition.startswith("name = generic_cubic\n")
    assert parse_web(definition) == read_web(GENERIC)


@pytest.mark.parametrize("name", sorted(GOLDEN_WEBS))
def test_verify_matches_golden(name, capsys, golden):
    path, point, exact = GOLDEN_WEBS[name]
    assert run_cli(["verify", "--web", path, "--point", point, "--json"]) == 0
    golden(f"{name}_verify.json", capsys.readouterr().out, exact=exact)


def test_missing_golden_fails(monkeypatch, tmp_path, golden):
    monkeypatch.delenv("WEBGEOM_UPDATE_GOLDEN", raising=False)
    monkeypatch.setattr(shared, "GOLDEN_DIR", tmp_path)
    with pytest.raises(pytest.fail.Exception, match="missing"):
        golden("absent.json", "{}\n")
    assert not (tmp_path / "absent.json").exists()


def test_update_golden_rewrites(monkeypatch, tmp_path, golden):
    monkeypatch.setenv("WEBGEOM_UPDATE_GOLDEN", "1")
    monkeypatch.setattr(shared, "GOLDEN_DIR", tmp_path)
    golden("fresh.json", "{}\n")
    assert (tmp_path / "fresh.json").read_text(encoding="utf-8") == "{}\n"


def test_golden_tolerance_rejects_changed_verdict():
    expected = {"flag": True, "b": 1.0, "note": None}
    shared.assert_same_document({"flag": True, "b": 1.0 + 1e-12, "note": None}, expected)
    with pytest.raises(AssertionError):
        shared.assert_same_document({"flag": False, "b": 1.0, "note": None}, expected)
    with pytest.raises(AssertionError):
        shared.assert_same_document({"flag": True, "b": 1.001, "note": None}, expected)
    with pytest.raises(AssertionError):
        shared.assert_same_document({"b": 1.0, "flag": True, "note": None}, expected)
