import json
import subprocess
import sys
from pathlib import Path

import pytest

from zomirror.cli import main

ROOT = Path(__file__).resolve().parents[1]
BUNDLED = ROOT / "configs" / "quadratic_d10.cfg"


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_bundled_config(tmp_path):
    assert main(["run", "--config", str(BUNDLED), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["all_certified"] is True
    assert report["achieved_gap"] <= report["bound"]
    assert (tmp_path / "gap.dat").read_text().startswith("# iter gap")
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "iter,f,eta,cert_lhs,cert_rhs,cert_pass,M,R,alpha,in_V,evals_cum"


def test_malformed_config_exit_2(tmp_path, capsys):
    assert main(["run", "--config", write(tmp_path, "dim = 3\nbogus = 1\n")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_t_max_one(tmp_path):
    cfg = write(tmp_path, "dim = 3\nt_max = 1\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["bound_defined"] is False and report["total_steps"] == 0


def test_domain_escape_exit_3(tmp_path):
    cfg = write(tmp_path, "problem = simplex-quadratic\nmirror = entropy\ndim = 3\nL = 100\n"
                          "field = analytic-grad\neta0 = 1e4\nt_max = 5\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_entropy_run_on_simplex(tmp_path):
    cfg = write(tmp_path, "problem = simplex-quadratic\nmirror = entropy\ndim = 4\n"
                          "field = fd-coordinate\neta0 = 0.1\nt_max = 50\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["status"] == "ok"


def test_certify_writes_checks(tmp_path):
    cfg = write(tmp_path, "dim = 2\nmu = 1\nL = 4\n")
    assert main(["certify", "--config", cfg, "--out", str(tmp_path)]) == 0
    checks = json.loads((tmp_path / "checks.json").read_text())
    assert checks["all_pass"] and checks["checks"]["propA"]["cos_theta"] == pytest.approx(0.8)


def test_conic_spot_value(capsys):
    assert main(["conic", "--m-norm", "1", "--R", "0.6", "--c", "0.8", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["alpha"] == pytest.approx(5.8)


def test_conic_infeasible(capsys):
    assert main(["conic", "--m-norm", "1", "--R", "0.6", "--c", "0.5"]) == 1
    assert "cone" in capsys.readouterr().err


def test_conic_witness_values(capsys):
    assert main(["conic", "--m-norm", "1", "--R", "0.6", "--c", "0.8", "--witness", "t=4.0", "--json"]) == 0
    w = json.loads(capsys.readouterr().out)["witness"]
    assert w["u"] == pytest.approx([0.8, 0.6]) and w["inner_u_w"] == pytest.approx(2.6)


def test_sweep_summary(tmp_path):
    cfg = write(tmp_path, "dim = 5\nx1_radius = 10\neta0 = 0.125\nt_max = 10\n"
                          "sweep_epsilon = 1e-2, 1e-3\nsweep_rule = fixed, geometric-grid\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    rows = (tmp_path / "s" / "summary.csv").read_text().splitlines()
    assert rows[0] == "epsilon,rule,final_gap,bound,floor_term,evals,sum_eta,status"
    cells = [r.split(",") for r in rows[1:]]
    assert len(cells) == 4 and all(c[-1] == "ok" for c in cells)
    fixed, grid = cells[2], cells[3]
    assert float(grid[6]) >= float(fixed[6])


def test_single_cell_sweep_matches_run(tmp_path):
    cfg = write(tmp_path, "dim = 3\nt_max = 8\n")
    main(["run", "--config", cfg, "--out", str(tmp_path / "r")])
    main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")])
    assert (tmp_path / "r" / "trajectory.csv").read_bytes() == \
        (tmp_path / "s" / "cell000" / "trajectory.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "zomirror", "conic", "--m-norm", "1", "--R", "0.6", "--c", "0.8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "5.8" in proc.stdout
