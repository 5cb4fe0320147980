import json

import pytest

from warpsimons import cli

INLINE = {
    "name": "bumped_sphere",
    "ambient": {"epsilon": 1, "warp": "t", "interval": [0, 50], "fiber_dim": 2, "fiber_curv": 1.0},
    "immersion": {
        "components": ["1.5 + 0.1*sin(u1)*u2", "u1", "u2"],
        "domain_box": [[-1, 1], [-1, 1]],
        "sample_region": [[-0.5, 0.5], [-0.5, 0.5]],
    },
    "checks": ["fundamental", "simons", "nomizu_smyth"],
    "points": 3,
}


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_catalog_entry(capsys):
    code, out, err = run_cli(["verify", "--catalog", "veronese_RxS4", "--checks", "simons,psi_fit", "--points", "4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert [c["name"] for c in doc["checks"]] == ["simons", "psi_fit"]
    assert len(doc["checks"][0]["points"]) == 4
    assert "PASS simons" in err


def test_default_checks_expand_fundamental(capsys):
    code, out, _ = run_cli(["verify", "--catalog", "slice", "--points", "2"], capsys)
    assert code == 0
    assert [c["name"] for c in json.loads(out)["checks"]] == ["gauss", "codazzi", "ricci", "simons"]


def test_failing_check_exits_one(capsys):
    code, out, err = run_cli(["verify", "--catalog", "graph", "--checks", "gauss", "--tol", "gauss=0", "--points", "2"], capsys)
    assert code == 1
    assert json.loads(out)["pass"] is False
    assert "FAIL gauss" in err


def test_precondition_failures_are_reported_not_raised(capsys):
    code, out, _ = run_cli(["verify", "--catalog", "graph", "--checks", "pp", "--points", "2"], capsys)
    assert code == 1
    point = json.loads(out)["checks"][0]["points"][0]
    assert point["rel"] is None and "PreconditionError" in point["error"]


def test_output_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"r{i}.json" for i in range(2)]
    for p in paths:
        assert cli.main(["verify", "--catalog", "adS_product", "--checks", "fundamental,pp", "--points", "3", "--seed", "5", "--out", str(p)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_seed_changes_points(capsys):
    _, a, _ = run_cli(["verify", "--catalog", "slice", "--checks", "gauss", "--points", "2", "--seed", "1"], capsys)
    _, b, _ = run_cli(["verify", "--catalog", "slice", "--checks", "gauss", "--points", "2", "--seed", "2"], capsys)
    assert json.loads(a)["checks"][0]["points"][0]["u"] != json.loads(b)["checks"][0]["points"][0]["u"]


def test_inline_config(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(INLINE))
    code, out, _ = run_cli(["verify", "--config", str(path)], capsys)
    doc = json.loads(out)
    assert code == 0, doc
    assert doc["entry"] == "bumped_sphere"
    assert [c["name"] for c in doc["checks"]] == ["gauss", "codazzi", "ricci", "simons", "nomizu_smyth"]


def test_malformed_warp_reports_offset(tmp_path, capsys):
    bad = json.loads(json.dumps(INLINE))
    bad["ambient"]["warp"] = "t * (1 +"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, err = run_cli(["verify", "--config", str(path)], capsys)
    assert code == 2 and out == ""
    assert "offset 8" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify"],
        ["verify", "--catalog", "nope"],
        ["verify", "--catalog", "slice", "--checks", "bogus"],
        ["verify", "--catalog", "slice", "--tol", "gauss"],
        ["verify", "--catalog", "slice", "--tol", "gauss=abc"],
        ["verify", "--catalog", "slice", "--tol", "bogus=1"],
        ["verify", "--catalog", "slice", "--points", "0"],
        ["verify", "--config", "/nonexistent/run.json"],
    ],
)
def test_configuration_errors_exit_two(argv, capsys):
    code, out, err = run_cli(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_tolerance_parsing():
    assert cli._parse_tols(["gauss=1e-3,simons=2", "pp=0.5"]) == {"gauss": 1e-3, "simons": 2.0, "pp": 0.5}


def test_list_catalog(capsys):
    code, out, _ = run_cli(["list-catalog"], capsys)
    assert code == 0
    assert "veronese_RxS4:" in out and "alpha_norm_sq = 1.3333333333333333" in out


def test_json_has_no_nan():
    text = cli.dumps({"x": float("nan"), "y": [float("inf"), 1.0]})
    assert json.loads(text) == {"x": None, "y": [None, 1.0]}
