import numpy as np

from fxtmrac.verify import CHECKS, run_suite


def test_suite_passes(cfg):
    results = run_suite(cfg)
    assert len(results) == len(CHECKS) >= 20
    assert len({r.name for r in results}) == len(results)
    assert [r.name for r in results if not r.passed] == []


def test_tampered_generator_is_named(cfg):
    results = run_suite(cfg, generator=-np.eye(2), only={"homogeneity.generator_anti_hurwitz",
                                                        "homogeneity.group_law"})
    assert {r.name for r in results if not r.passed} == {
        "homogeneity.generator_anti_hurwitz", "homogeneity.group_law"}
