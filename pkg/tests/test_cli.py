import json
import subprocess
import sys

import pytest

from zeromass.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def p4_file(tmp_path):
    f = tmp_path / "p4.json"
    f.write_text(json.dumps({"N": 3, "A": 1, "alpha": 1, "p": 4}))
    return f


def test_bessel_eval(capsys):
    code, out, _ = run(capsys, "bessel-eval", "--nu", "0.5", "--t", "1")
    assert code == 0 and out["K"] == pytest.approx(1.2533141373155 * 0.36787944117144233, rel=1e-12)
    code, out, _ = run(capsys, "bessel-eval", "--nu", "0.5", "--t", "800", "--scaled")
    assert code == 0 and out["scaled"] is True


def test_domain_errors_exit_1(capsys):
    code, out, err = run(capsys, "bessel-eval", "--nu", "-1", "--t", "1")
    assert code == 1 and out is None and "bessel-eval" in err


def test_solve_and_checks(capsys, tmp_path, p4_file):
    prof = tmp_path / "v.csv"
    code, out, _ = run(capsys, "solve", "--params", str(p4_file), "--out", str(prof))
    assert code == 0 and out["converged"] and out["verified"] and out["membership"]["in_H"]
    code, out, _ = run(capsys, "verify-asymptotics", "--params", str(p4_file), "--profile", str(prof))
    assert code == 0 and out["measured"]["case"] == "Bounded" and out["pass"]
    code, out, _ = run(capsys, "pohozaev-check", "--params", str(p4_file), "--profile", str(prof), "--a", "0.1", "--b", "10")
    assert code == 0 and out["normalized"] <= 1e-5


def test_shoot(capsys, tmp_path, p4_file):
    code, out, _ = run(capsys, "shoot", "--params", str(p4_file), "--v0", "100")
    assert code == 0 and out["classification"] == "Crossing"
    prof = tmp_path / "g.csv"
    code, out, _ = run(capsys, "shoot", "--params", str(p4_file), "--bracket", "2,3", "--out", str(prof))
    assert code == 0 and out["found"] and out["v0"] == pytest.approx(2.50464469756, rel=1e-10)
    assert prof.exists()


def test_pohozaev_obstruction_report(capsys, tmp_path):
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"N": 3, "alpha": 1, "p": "16/5"}))
    prof = tmp_path / "e.csv"
    import numpy as np

    r = np.geomspace(1e-4, 60, 2048)
    prof.write_text("r,phi,dphi\n" + "\n".join(f"{x:.17g},{np.exp(-x):.17g},{-np.exp(-x):.17g}" for x in r) + "\n")
    code, out, _ = run(capsys, "pohozaev-check", "--params", str(params), "--profile", str(prof), "--a", "0.1")
    assert code == 1 and not out["pass"] and "obstruction" in out and out["limit_taken"]


def test_region_map_flags_and_config(capsys, tmp_path):
    csv_path, svg = tmp_path / "m.csv", tmp_path / "m.svg"
    code, out, _ = run(capsys, "region-map", "--N", "3", "--alpha", "0:4:0.5", "--p", "2:8:0.5", "--out", str(csv_path), "--svg", str(svg))
    assert code == 0 and out["shape"] == [8, 12]  # alpha = 0 and p = 2 are dropped
    assert svg.exists() and (tmp_path / "m.csv.json").exists()
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 3, "alpha": "1", "p": "4", "with_numerics": True, "cell_budget": 1e-6, "strict": True, "out": str(csv_path)}))
    code, out, _ = run(capsys, "region-map", "--config", str(cfg))
    assert code == 2 and out["timed_out"] == 1
    code, out, _ = run(capsys, "region-map", "--config", str(cfg), "--cell-budget", "60")
    assert code == 0 and out["counts"]["ExistenceRadial"] == 1


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "zeromass.cli", "bessel-eval", "--nu", "1", "--t", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["regime"]
