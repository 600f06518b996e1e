import json

import numpy as np
import pytest

from starcert.cli import main
from starcert.fixtures import fixture_path

IDEAL = str(fixture_path("ideal_n2_ghz.scenario.json"))
GHZ_REF = str(fixture_path("ghz_n2.povm.json"))
TAMPERED = str(fixture_path("tampered_n2_ghz.scenario.json"))
TRINE_SCEN = str(fixture_path("ideal_n2_trine.scenario.json"))
TRINE_REF = str(fixture_path("trine_n2.povm.json"))
MIXED_SPEC = str(fixture_path("mixed_demo.statespec.json"))


def test_bounds_text(capsys):
    assert main(["bounds", "--n", "2"]) == 0
    out = capsys.readouterr().out
    assert "2.414213562" in out
    assert "3.0" in out


def test_bounds_formula_only_marker(capsys):
    assert main(["bounds", "--n", "5"]) == 0
    assert "formula-only" in capsys.readouterr().out


def test_bounds_out_of_range():
    assert main(["bounds", "--n", "7"]) == 2


def test_certify_ideal_exits_zero(capsys):
    code = main([
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--mode", "projective",
    ])
    assert code == 0
    assert "Certified" in capsys.readouterr().out


def test_certify_tampered_exits_one(capsys):
    code = main([
        "certify", "--scenario", TAMPERED, "--reference", GHZ_REF,
        "--mode", "projective",
    ])
    assert code == 1
    assert "Failed" in capsys.readouterr().out


def test_certify_povm_mode(capsys):
    code = main([
        "certify", "--scenario", TRINE_SCEN, "--reference", TRINE_REF,
        "--mode", "povm",
    ])
    assert code == 0


def test_certify_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_parties": 2, "sources": [')
    code = main([
        "certify", "--scenario", str(bad), "--reference", GHZ_REF,
    ])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_certify_missing_file(capsys):
    assert main(["certify", "--scenario", "/no/such/file", "--reference", GHZ_REF]) == 2


def test_prepare_state(capsys):
    assert main(["prepare-state", "--state-spec", MIXED_SPEC]) == 0
    out = capsys.readouterr().out
    assert "Conjugate" in out


def test_prepare_state_invalid_weights(tmp_path):
    doc = {
        "d": 2,
        "weights": [0.5, 0.4],
        "vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    assert main(["prepare-state", "--state-spec", str(path)]) == 2


def test_scan_row_count(capsys):
    assert main(["scan", "--n", "2", "--grid", "0,0.5,1"]) == 0
    out = capsys.readouterr().out
    rows = [l for l in out.splitlines() if l and l[0].isdigit()]
    assert len(rows) == 3


def test_scan_empty_grid():
    assert main(["scan", "--n", "2", "--grid", ""]) == 2


def test_scan_structured_endpoints(capsys):
    assert main([
        "scan", "--n", "2", "--grid", "0,1", "--format", "structured",
        "--reproducible",
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["bell_monotone"] is True
    assert doc["rows"][0]["min_bell"] == pytest.approx(0.0, abs=1e-9)
    assert doc["rows"][1]["min_bell"] == pytest.approx(3.0, abs=1e-9)


def test_validate(capsys):
    assert main(["validate", "--scenario", IDEAL, "--state-spec", MIXED_SPEC]) == 0
    assert main(["validate", "--scenario", TAMPERED]) == 0  # well-formed file
    assert main(["validate"]) == 2


def test_structured_report_reproducible_bytes(capsys):
    argv = [
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--format", "structured", "--reproducible",
    ]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    assert first == second
    doc = json.loads(first)
    assert "timestamp" not in doc
    assert doc["verdict"] == "Certified"
    assert doc["inputs"]["scenario"]["sha256"]


def test_structured_report_has_timestamp(capsys):
    main([
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--format", "structured",
    ])
    doc = json.loads(capsys.readouterr().out)
    assert "timestamp" in doc


def test_out_flag_writes_file(tmp_path):
    out = tmp_path / "report.json"
    code = main([
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--format", "structured", "--reproducible", "--out", str(out),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["part2"]["branch"] == "Plain"


def test_tol_override_flag():
    # an absurdly tight tolerance makes even the ideal run fail
    code = main([
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--tol", "1e-18",
    ])
    assert code == 1
    code = main([
        "certify", "--scenario", IDEAL, "--reference", GHZ_REF,
        "--tol", "-1",
    ])
    assert code == 2


def test_fixture_round_trip():
    from starcert.network import load_scenario, scenario_to_json, scenario_from_json

    for name in ("ideal_n2_ghz", "ideal_n3_ghz", "ideal_n2_trine", "tampered_n2_ghz"):
        scen = load_scenario(str(fixture_path(f"{name}.scenario.json")))
        doc = scenario_to_json(scen)
        again = scenario_from_json(doc)
        assert scenario_to_json(again) == doc
