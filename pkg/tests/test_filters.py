import numpy as np
import pytest

from fxtmrac import (DisturbanceBounds, FilterBank, InvalidInputError, disturbance_envelope,
                     filter_derivatives, g_reconstruct, regressor)
from fxtmrac.sim import run, scenario_from_config

from conftest import B_SEC5


def test_zero_initial_bank():
    bank = FilterBank.zeros(2, 1.25, [5.0, 8.0])
    for arr in (bank.N, bank.h, bank.G2, bank.M, bank.H):
        assert not np.any(arr)
    with pytest.raises(InvalidInputError):
        FilterBank.zeros(2, 0.0, [5.0, 8.0])


def test_derivatives_at_start():
    x0 = np.array([5.0, 8.0])
    bank = FilterBank.zeros(2, 2.0, x0)
    dN, dh, dG2, dM, dH = filter_derivatives(bank, x0, 3.0, B_SEC5)
    np.testing.assert_array_equal(dN, regressor(x0))
    np.testing.assert_array_equal(dh, x0)
    np.testing.assert_array_equal(dG2, 3.0 * B_SEC5)
    assert not np.any(dM) and not np.any(dH)
    np.testing.assert_array_equal(g_reconstruct(bank, x0), 0.0)


def test_constant_input_steady_state():
    x = np.array([1.0, -2.0])
    k = 3.0
    bank = FilterBank.zeros(2, k, x)
    dt = 1e-3
    for _ in range(8000):
        dN, *_ = filter_derivatives(bank, x, 0.0, B_SEC5)
        bank.N = bank.N + dt * dN
    np.testing.assert_allclose(bank.N, regressor(x) / k, atol=1e-8)


def test_envelope():
    assert disturbance_envelope(1.0, 2.0, 0.0) == 0.0
    t = np.linspace(0, 20, 200)
    w = disturbance_envelope(np.sqrt(1.25), 1.25, t)
    assert np.all(np.diff(w) >= 0) and np.all(w >= 0)
    assert w[-1] == pytest.approx(np.sqrt(1.25) / 1.25, rel=1e-9)
    assert DisturbanceBounds(np.sqrt(1.25), 1.25).limit == pytest.approx(0.894427191)
    with pytest.raises(InvalidInputError):
        disturbance_envelope(1.0, -1.0, 1.0)


@pytest.fixture(scope="module")
def disturbed(cfg, report):
    return run(scenario_from_config(cfg, report, t_end=3.0))


@pytest.fixture(scope="module")
def clean(cfg, report):
    return run(scenario_from_config(cfg, report, t_end=3.0, disturbance=False))


def test_identities_without_disturbance(clean):
    assert clean["g_identity"].max() <= 1e-6
    assert clean["h_identity"].max() <= 1e-6
    assert clean["g1_gap"].max() <= 1e-9


def test_disturbance_envelopes_hold(disturbed):
    assert np.all(disturbed["g_identity"] <= disturbed["w_bar"] + 1e-8)
    assert np.all(disturbed["h_identity"] <= disturbed["w1_bar"] + 1e-8)
    # the by-parts reconstruction never sees d, so the oracle gap stays tiny
    assert disturbed["g1_gap"].max() <= 1e-9


def test_M_psd_and_rank(clean):
    assert clean["lambda_min_M"].min() >= -1e-10
    i = np.searchsorted(clean.t, 0.5)
    assert clean["rank_M"][i] == 4
