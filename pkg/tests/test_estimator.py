import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fxtmrac import (EstimatorState, InvalidAuxiliaryConstants, InvalidInputError,
                     baseline_exponential_update, fxt_update, settling_bound, signed_power,
                     vectorize_params)

from conftest import A_SEC5


def test_signed_power_fixtures():
    np.testing.assert_allclose(signed_power(np.array([-4.0]), 0.5), [-2.0])
    np.testing.assert_allclose(signed_power(np.array([0.0, 8.0]), 1 / 3), [0.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=8),
       st.floats(0.05, 3.0))
def test_signed_power_properties(v, a):
    v = np.array(v)
    np.testing.assert_array_equal(signed_power(v, 1.0), v)
    np.testing.assert_allclose(signed_power(-v, a), -signed_power(v, a))
    out = signed_power(v, a)
    # tiny magnitudes may underflow to zero, otherwise the sign is kept
    assert np.all((np.sign(out) == np.sign(v)) | (out == 0))


def test_state_validation():
    with pytest.raises(InvalidInputError):
        EstimatorState(np.zeros(4), alpha=1.0)
    with pytest.raises(InvalidInputError):
        EstimatorState(np.zeros(4), kappa=0.0)


def test_rates_vanish(rng):
    theta = vectorize_params(A_SEC5)
    N = rng.normal(size=(2, 4))
    M = N.T @ N
    st_ = EstimatorState(theta)
    np.testing.assert_allclose(fxt_update(st_, N, N @ theta, M, M @ theta), 0, atol=1e-12)
    np.testing.assert_allclose(baseline_exponential_update(st_, N, N @ theta, M, M @ theta),
                               0, atol=1e-12)
    z = EstimatorState(rng.normal(size=4))
    zero = np.zeros((2, 4))
    np.testing.assert_array_equal(fxt_update(z, zero, np.zeros(2), np.zeros((4, 4)),
                                             np.zeros(4)), 0)
    np.testing.assert_array_equal(baseline_exponential_update(z, zero, np.zeros(2),
                                                              np.zeros((4, 4)), np.zeros(4)), 0)


def test_fxt_rate_formula(rng):
    N = rng.normal(size=(2, 4))
    M = rng.normal(size=(4, 4))
    G, H = rng.normal(size=2), rng.normal(size=4)
    th = rng.normal(size=4)
    st_ = EstimatorState(th, kappa=2.0, gamma=3.0, alpha=0.5)
    rg, rh = G - N @ th, H - M @ th
    sp = lambda v, a: np.abs(v) ** a * np.sign(v)
    want = (2.0 * N.T @ (sp(rg, 0.5) + sp(rg, 1.5)) + 3.0 * M.T @ (sp(rh, 0.5) + sp(rh, 1.5)))
    np.testing.assert_allclose(fxt_update(st_, N, G, M, H), want, rtol=1e-13)
    np.testing.assert_allclose(baseline_exponential_update(st_, N, G, M, H),
                               4.0 * N.T @ rg + 6.0 * M.T @ rh, rtol=1e-13)


def test_fxt_decreases_error_on_static_problem(rng):
    # frozen full-rank filters: the law is a gradient flow on the residuals
    theta = vectorize_params(A_SEC5)
    N = rng.normal(size=(2, 4))
    M = N.T @ N + np.eye(4)
    G, H = N @ theta, M @ theta
    th = np.zeros(4)
    errs = []
    for _ in range(20000):
        th = th + 1e-3 * fxt_update(EstimatorState(th, kappa=0.1, gamma=0.1), N, G, M, H)
        errs.append(np.linalg.norm(th - theta))
    assert errs[-1] < 1e-3 * errs[0]


def test_settling_bound_sec5():
    sb = settling_bound(2 / 3, 0.022, 50.0, 2, 0.8, 0.6, 1, 0.5)
    assert sb.p == pytest.approx(0.1952, abs=1e-3)
    assert sb.kappa1 == pytest.approx(0.1224, abs=1e-3)
    assert sb.kappa2 == pytest.approx(8.15e-4, rel=1e-2)
    assert sb.T_max > sb.q * sb.T
    # the printed formula does not give the printed 4.35 s
    assert sb.T_max == pytest.approx(3706.09, rel=1e-5)


def test_settling_bound_invalid_constants():
    with pytest.raises(InvalidAuxiliaryConstants, match="c=0.99"):
        settling_bound(2 / 3, 0.022, 50.0, 2, 0.99, 0.99, 1, 0.5)
    with pytest.raises(InvalidInputError):
        settling_bound(1.2, 0.022, 50.0, 2, 0.8, 0.6, 1, 0.5)
