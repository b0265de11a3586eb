import json

import pytest

from fxtmrac.cli import main
from fxtmrac.verify import CHECKS


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_design_preset(capsys, tmp_path):
    assert main(["design", "--preset", "paper-sec5", "--out", str(tmp_path)]) == 0
    out = _json(capsys)
    assert out["K"] == pytest.approx([-1.26, -2.71], abs=0.01)
    assert (tmp_path / "design.json").exists()


def test_design_audit(capsys):
    assert main(["design", "--preset", "paper-sec5", "--audit"]) == 0
    items = {a["item"]: a for a in _json(capsys)["audit"]}
    assert items["C1 residual"]["discrepancy"]
    assert items["P_1 Lyapunov check"]["discrepancy"]


def test_design_infeasible(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"preset": "paper-sec5", "design": {"zeta": 0.3}}))
    assert main(["design", "--config", str(path)]) == 2
    assert "C3 precondition" in capsys.readouterr().err


def test_invalid_configs(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"plant": {"B": [0, 1]}}))
    assert main(["design", "--config", str(path)]) == 3
    path.write_text(json.dumps({"preset": "paper-sec5", "bogus": 1}))
    assert main(["simulate", "--config", str(path)]) == 3
    assert "bogus" in capsys.readouterr().err


def test_simulate_writes_outputs(capsys, tmp_path):
    code = main(["simulate", "--preset", "paper-sec5", "--no-disturbance", "--t-end", "1",
                 "--out", str(tmp_path)])
    assert code == 0
    s = _json(capsys)
    assert s["disturbance"] is False and s["t_end"] == pytest.approx(1.0)
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0].startswith("t,x_1,x_2,xm_1") and len(lines) == 102
    assert json.loads((tmp_path / "summary.json").read_text()) == s


def test_simulate_blow_up(capsys, tmp_path):
    code = main(["simulate", "--preset", "paper-sec5", "--dt", "0.01", "--t-end", "5",
                 "--out", str(tmp_path)])
    assert code == 4
    assert "blow-up" in capsys.readouterr().err


def test_sweep(capsys):
    code = main(["sweep", "--preset", "paper-sec5", "--no-disturbance", "--t-end", "1",
                 "--theta0", "0", "10"])
    assert code == 0
    assert len(_json(capsys)["runs"]) == 2


def test_verify(capsys):
    assert len(CHECKS) >= 20
    assert main(["verify"]) == 0
    out = _json(capsys)
    assert out["failures"] == [] and out["n_checks"] >= 20


def test_verify_tampered_generator(capsys, tmp_path):
    # L = -10 I makes G_d = 0.5 I + 0.2 L Hurwitz
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"preset": "paper-sec5",
                                "design": {"L": [[-10.0, 0.0], [0.0, -10.0]]}}))
    assert main(["verify", "--config", str(path)]) == 1
    assert "homogeneity.generator_anti_hurwitz" in _json(capsys)["failures"]
