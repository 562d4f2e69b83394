import json
import os
import subprocess
import sys

import pytest

from pdisks.cli import main, parse_monomial, parse_vector


def run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--output", str(out)])
    return code, out


def test_parse_helpers():
    assert list(parse_vector("1,0.5+0.2j")) == [1, 0.5 + 0.2j]
    assert parse_monomial("l=3,m=0,k=1") == (3, 0, 1)
    assert parse_monomial("l=2,m=1,k=inf") == (2, 1, None)


def test_solve_integrable(tmp_path):
    code, out = run(tmp_path, "solve", "--catalog", "integrable", "--n", "2", "--R", "1", "--u", "1,0")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["result"]["verdict"] == "converged" and doc["result"]["residual"] <= 1e-12
    assert doc["seed"] == 0 and doc["version"] and doc["config"]["u"] == "1,0"
    meta = json.loads((tmp_path / "out.json.meta.json").read_text())
    assert meta["wall_time_s"] >= 0 and meta["exit_code"] == 0


def test_solve_perturbed(tmp_path):
    code, out = run(tmp_path, "solve", "--catalog", "perturbed", "--amplitude", "0.05", "--R", "1",
                    "--R-solve", "0.9", "--u", "1,0")
    assert code == 0 and json.loads(out.read_text())["result"]["verdict"] == "converged"


def test_solve_divergence_exit_code(tmp_path):
    code, out = run(tmp_path, "solve", "--catalog", "integrable", "--u", "1,0.5")
    assert code == 2 and json.loads(out.read_text())["result"]["verdict"] == "diverged"


def test_bad_structure_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "R": 1, "R1": 0.1, "terms": [
        {"i": 2, "mbar": 1, "alpha": [0, 0], "beta": [0, 1], "re": 0.3}]}))
    code = main(["solve", "--structure", str(bad), "--u", "1,0"])
    assert code == 1 and "'im'" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert main(["solve", "--structure", str(tmp_path / "missing.json")]) == 1
    assert main(["solve", "--u", "1,0,0"]) == 1
    assert main(["pseudonorm", "--v", "1,0", "--tol", "-1"]) == 1
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_operator_check(tmp_path):
    code, out = run(tmp_path, "operator-check", "--monomial", "l=3,m=0,k=1", "--count", "20", "--samples", "2")
    res = json.loads(out.read_text())["result"]
    assert code == 0 and res["max_residual"] <= 1e-8
    mono = res["monomials"][0]
    assert mono["coefficient_error"] == 0.0
    assert {(t["l"], t["m"], t["re"]) for t in mono["terms"]} == {(3, 1, 1.0), (2, 0, -1.0)}
    assert res["bounds"]["sample_count"] == 2


def test_operator_check_no_samples(tmp_path):
    code, out = run(tmp_path, "operator-check", "--samples", "0", "--count", "1")
    assert code == 0 and json.loads(out.read_text())["result"]["bounds"] == {}


def test_pseudonorm_product(tmp_path):
    code, out = run(tmp_path, "pseudonorm", "--catalog", "product-disk", "--R", "1", "--R1", "0.5", "--v", "1,1")
    res = json.loads(out.read_text())["result"]
    assert code == 0 and res["value"] == pytest.approx(2.0, rel=0.05)
    assert res["witness"]["coefficients"]


def test_hyperbolicity_csv(tmp_path):
    code, out = run(tmp_path, "hyperbolicity", "--catalog", "integrable", "--region", "full",
                    "--directions", "2", "--format", "csv", name="scan.csv")
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert code == 0
    assert lines[0] == "point,p1_re,p1_im,p2_re,p2_im,v1_re,v1_im,v2_re,v2_im,F"
    assert len(lines) == 1 + 5 * 2
    assert min(float(l.split(",")[-1]) for l in lines[1:]) > 0


def test_no_temp_files_left(tmp_path):
    run(tmp_path, "operator-check", "--count", "1", "--samples", "0")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json", "out.json.meta.json"]


def _cli(args, threads, cwd):
    env = dict(os.environ, PDISKS_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "pdisks"] + args, env=env, cwd=cwd,
                          capture_output=True, text=True)


def test_threads_env_and_module_entry(tmp_path):
    args = ["hyperbolicity", "--catalog", "integrable", "--region", "full", "--directions", "3"]
    a, b = _cli(args, 1, tmp_path), _cli(args, 8, tmp_path)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
    bad = _cli(["solve"], "x", tmp_path)
    assert bad.returncode == 1 and "PDISKS_THREADS" in bad.stderr
