import json
import subprocess
import sys

import pytest

from solitonkit import catalog
from solitonkit.cli import dumps, run


def run_json(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_catalog_list(capsys):
    code, out = run_json(capsys, "catalog", "list")
    assert code == 0
    assert out.splitlines() == catalog.names()


def test_catalog_show_and_sweep(capsys):
    code, doc = run_json(capsys, "catalog", "show", "cigar")
    assert code == 0 and doc["expected"]["hamilton_energy"]["target"] == 4.0
    code, doc = run_json(capsys, "catalog", "sweep", "round_sphere", "--param", "n=3", "--samples", "4", "--no-meta")
    assert code == 0 and all(doc["summary"]["verdicts"].values())


def test_verify_cigar(capsys):
    code, doc = run_json(capsys, "verify", "--catalog", "cigar", "--samples", "8", "--no-meta")
    assert code == 0
    assert set(doc) == {"input", "settings", "points", "summary"}
    assert set(doc["summary"]) == {"max_residuals", "verdicts"}
    assert len(doc["points"]) == 8
    for p in doc["points"]:
        assert p["hamilton_energy"] == pytest.approx(4.0, abs=1e-8)


def test_verify_failing_control_exits_one(capsys):
    code, doc = run_json(capsys, "verify", "--catalog", "perturbed_non_soliton", "--samples", "6", "--no-meta")
    assert code == 1 and doc["summary"]["verdicts"]["is_soliton"] is False


def test_verify_bryant_chart(capsys):
    code, doc = run_json(capsys, "verify", "--catalog", "bryant", "--param", "n=4", "--samples", "4", "--no-meta")
    assert code == 0, doc["summary"]
    assert doc["constancy_scan"]["scalar_spread"] < 1e-6


def test_verify_explicit_points(capsys):
    code, doc = run_json(capsys, "verify", "--catalog", "cigar", "--point", "0,0", "--point", "1,0",
                         "--point", "2,3", "--no-meta")
    assert code == 0 and [p["point"] for p in doc["points"]] == [[0.0, 0.0], [1.0, 0.0], [2.0, 3.0]]


def test_tensors(capsys):
    code, doc = run_json(capsys, "tensors", "--catalog", "round_sphere", "--param", "n=4", "--point",
                         "1,1,1,1", "--no-meta")
    assert code == 0
    assert doc["points"][0]["scalar"] == pytest.approx(12.0)


def test_rerun_is_byte_identical(capsys):
    argv = ["verify", "--catalog", "cigar_product", "--samples", "3", "--seed", "7", "--no-meta"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


def test_meta_block_only_without_flag(capsys):
    _, doc = run_json(capsys, "classify", "--catalog", "flat", "--samples", "3")
    assert "meta" in doc and "generated" in doc["meta"]


@pytest.mark.parametrize("name,expected,code", [
    ("flat", "ricci_flat_constant_potential", 0),
    ("product_line_cross_fiber", "product_ricci_flat_fiber", 0),
    ("perturbed_non_soliton", "not_a_soliton", 1),
    ("cigar", "inconclusive", 1),
])
def test_classify_catalog(capsys, name, expected, code):
    got, doc = run_json(capsys, "classify", "--catalog", name, "--samples", "6", "--no-meta")
    assert got == code
    assert doc["classification"]["branch"] == expected


def test_bryant_then_classify(tmp_path, capsys):
    csv = tmp_path / "p.csv"
    assert run(["bryant", "--n", "4", "--rmax", "1000", "--out", str(csv), "--no-meta"]) == 0
    side = json.loads((tmp_path / "p.json").read_text())
    assert side["asymptotics"]["volume_growth_exponent"] == pytest.approx(2.5, abs=0.1)
    assert side["profile"] == {"n": 4, "lambda": 2.0, "rows": 2001, "steps": side["profile"]["steps"]}
    code, doc = run_json(capsys, "classify", "--profile", str(csv), "--no-meta")
    assert code == 0 and doc["classification"]["branch"] == "bryant"
    # without the sidecar the dimension is inferred from the equations
    (tmp_path / "p.json").unlink()
    code, doc = run_json(capsys, "classify", "--profile", str(csv), "--no-meta")
    assert code == 0 and doc["input"]["n"] == 4


def test_verify_profile(tmp_path, capsys):
    csv = tmp_path / "b5.csv"
    assert run(["bryant", "--n", "5", "--rmax", "200", "--out", str(csv), "--no-meta"]) == 0
    code, doc = run_json(capsys, "verify", "--profile", str(csv), "--samples", "4", "--no-meta")
    assert code == 0, doc["summary"]


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["verify"],
    ["verify", "--catalog", "no_such_entry"],
    ["verify", "--profile", "/nonexistent/p.csv"],
    ["catalog", "show"],
    ["classify", "--catalog", "gaussian_shrinker"],
    ["catalog", "show", "round_sphere", "--param", "radius=-1"],
    ["catalog", "show", "flat", "--param", "oops"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert run(argv) == 2


def test_json_numbers_have_seventeen_digits():
    assert dumps({"x": 0.1, "y": [1, 2.5], "z": float("nan")}) == '{\n  "x": 0.10000000000000001,\n  "y": [1, 2.5],\n  "z": null\n}\n'


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "solitonkit.cli", "catalog", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "cigar" in proc.stdout.split()
