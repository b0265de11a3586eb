import json

import numpy as np
import pytest

from fxtmrac import InvalidInputError, audit, build_design, get_preset, load_config
from fxtmrac.config import deep_merge, validate_config


def test_preset_values_as_printed():
    p = get_preset("paper-sec5")
    assert p["plant"]["A"] == [[0.0, 1.0], [-5.0, -6.0]]
    assert p["reference"]["A_m"] == [[0.0, 1.0], [-7.0, -10.0]]
    assert p["simulation"]["x0"] == [5.0, 8.0]
    assert p["design"]["lmi"]["X"] == [[14.5, -6.0], [-6.0, 5.0]]
    assert (p["design"]["lmi"]["chi"], p["design"]["lmi"]["eta"],
            p["design"]["lmi"]["iota"]) == (12.6, 0.14, 0.25)
    assert p["printed"]["P_1"] == [[0.3025, -0.5], [-0.5, 1.05]]
    assert p["controller"]["Gamma_d"] == [[10.0, 0.0], [0.0, 10.0]]
    assert (p["estimator"]["kappa"], p["estimator"]["gamma"]) == (25.0, 50.0)
    assert p["design"]["beta"] == 1.5 and p["design"]["zeta"] == 0.1


def test_preset_is_immutable():
    p = get_preset("paper-sec5")
    p["plant"]["A"][0][0] = 99.0
    assert get_preset("paper-sec5")["plant"]["A"][0][0] == 0.0
    with pytest.raises(InvalidInputError):
        get_preset("nope")


def test_deep_merge():
    base = {"a": {"b": 1, "c": [1, 2]}, "d": 3}
    out = deep_merge(base, {"a": {"c": [5]}, "e": 4})
    assert out == {"a": {"b": 1, "c": [5]}, "d": 3, "e": 4}
    assert base["a"]["c"] == [1, 2]


def test_unknown_and_missing_keys(tmp_path):
    cfg = get_preset("paper-sec5")
    cfg["plant"]["extra"] = 1
    with pytest.raises(InvalidInputError, match="extra"):
        validate_config(cfg)
    cfg = get_preset("paper-sec5")
    del cfg["plant"]["A"]
    with pytest.raises(InvalidInputError, match="'A' is a required property"):
        validate_config(cfg)


def test_dimension_cross_checks():
    with pytest.raises(InvalidInputError, match="theta0"):
        load_config("paper-sec5", overrides={"estimator": {"theta0": [0.0, 0.0]}})
    with pytest.raises(InvalidInputError, match="controller.Gamma_d"):
        load_config("paper-sec5", overrides={"controller": {"Gamma_d": [[1.0]]}})


def test_file_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"preset": "paper-sec5", "filter": {"k": 2.0}}))
    cfg = load_config(path=str(path))
    assert cfg["filter"]["k"] == 2.0 and cfg["plant"]["A"][1] == [-5.0, -6.0]
    path.write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_config(path=str(path))


def test_design_report(report):
    d = report.design
    assert d.verified
    np.testing.assert_allclose(d.K, [-1.26, -2.71], atol=0.01)
    assert d.residual_c1 > 0
    assert report.P_1_eigs[0] > 0


def test_synthesised_design(cfg):
    c = deep_merge(cfg, {"design": {"lmi": None, "beta": None}})
    rep = build_design(validate_config(c))
    assert rep.design.verified and rep.lmi_source == "synthesised"


def test_audit_flags(cfg, report):
    items = {a["item"]: a for a in audit(cfg, report)}
    assert items["C1 residual"]["discrepancy"] and items["C1 residual"]["computed"] > 0
    assert items["P_1 Lyapunov check"]["discrepancy"]
    assert min(items["P_1 Lyapunov check"]["computed"]) < 0
    assert items["T_max formula"]["computed"] > 1000
    assert not items["K from LMI"]["discrepancy"]
