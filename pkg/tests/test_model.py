import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fxtmrac import (InvalidInputError, PlantModel, ReferenceModel, SignalSpec, SineTerm,
                     plant_derivative, reference_derivative, regressor, unvectorize_params,
                     vectorize_params)
from fxtmrac.model import controllability_matrix

from conftest import A_SEC5, AM_SEC5, B_SEC5

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_regressor_fixture():
    np.testing.assert_array_equal(regressor(np.array([5.0, 8.0])),
                                  [[5, 8, 0, 0], [0, 0, 5, 8]])
    np.testing.assert_array_equal(regressor(np.zeros(3)), np.zeros((3, 9)))


def test_regressor_times_theta_is_A_x():
    np.testing.assert_allclose(regressor([5.0, 8.0]) @ vectorize_params(A_SEC5), [8, -73])


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=9, max_size=9), st.lists(finite, min_size=3, max_size=3))
def test_regressor_identity_property(a, x):
    A = np.array(a).reshape(3, 3)
    x = np.array(x)
    lhs = regressor(x) @ vectorize_params(A)
    np.testing.assert_allclose(lhs, A @ x, rtol=1e-12, atol=1e-9)


def test_regressor_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        regressor(np.array([1.0, np.nan]))
    with pytest.raises(InvalidInputError):
        regressor(np.zeros(3), n=2)


def test_vectorize_ordering_and_roundtrip(rng):
    np.testing.assert_array_equal(vectorize_params(A_SEC5), [0, 1, -5, -6])
    np.testing.assert_array_equal(vectorize_params(np.eye(2)), [1, 0, 0, 1])
    a = rng.normal(size=(3, 3))
    np.testing.assert_array_equal(unvectorize_params(vectorize_params(a)), a)
    with pytest.raises(InvalidInputError):
        unvectorize_params(np.zeros(5))


def test_plant_validation():
    with pytest.raises(InvalidInputError):
        PlantModel(np.zeros((2, 3)), [0, 1])
    with pytest.raises(InvalidInputError):
        PlantModel(A_SEC5, [0, 0])
    assert PlantModel(A_SEC5, B_SEC5).controllable
    assert not PlantModel(np.diag([-1.0, -2.0]), [1.0, 0.0]).controllable
    assert np.linalg.matrix_rank(controllability_matrix(A_SEC5, B_SEC5)) == 2


def test_plant_derivative_fixtures(rng):
    plant = PlantModel(A_SEC5, B_SEC5)
    np.testing.assert_array_equal(plant_derivative(plant, np.zeros(2), 0.0, 0.0), 0)
    np.testing.assert_allclose(plant_derivative(plant, [5.0, 8.0], 0.0, 0.0), [8, -73])
    dist = SignalSpec((0.1, -0.2), (SineTerm(0.5, 50.0, 0.0, 0.0, 0), SineTerm(1.0, 50.0)))
    plant = PlantModel(A_SEC5, B_SEC5, dist)
    for _ in range(100):
        x, u, t = rng.normal(size=2), rng.normal(), rng.uniform(0, 10)
        np.testing.assert_allclose(plant.derivative(x, u, t), plant.derivative_lip(x, u, t),
                                   rtol=0, atol=1e-12)


def test_reference_model(cfg):
    ref = ReferenceModel(AM_SEC5, B_SEC5)
    assert ref.hurwitz
    np.testing.assert_array_equal(reference_derivative(ref, np.zeros(2), 1.0), 0)
    assert not ReferenceModel(A_SEC5 * -1, B_SEC5).hurwitz
    from fxtmrac.config import build_models
    _, ref = build_models(cfg)
    assert ref.r_value(0.0) == pytest.approx(5.0)
    assert ref.r_value(6.0) == pytest.approx(5 + 3 * np.sin(6) + 5 * np.sin(12), abs=1e-14)
    # the step is closed: active at t = 5 exactly
    assert ref.r_value(5.0) == pytest.approx(5 + 3 * np.sin(5) + 5 * np.sin(10), abs=1e-14)


def test_signal_bounds():
    d = SignalSpec((0.0, 0.0), (SineTerm(0.5, 50.0, channel=0), SineTerm(1.0, 50.0, channel=1)))
    np.testing.assert_allclose(d.channel_bounds(), [0.5, 1.0])
    assert d.sup_bound() == pytest.approx(np.sqrt(1.25))
    with pytest.raises(InvalidInputError):
        SignalSpec((0.0,), (SineTerm(1.0, 1.0, channel=1),))
    ts = np.linspace(0, 3, 500)
    assert max(np.linalg.norm(d(t)) for t in ts) <= d.sup_bound() + 1e-12
