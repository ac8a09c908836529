import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpnorm.errors import ParameterError
from lpnorm.params import (
    DerivedParams,
    PerturbationParams,
    derive,
    perturbation_magnitude,
    perturbation_scale,
    q_from_grain,
)

valid_params = st.builds(
    PerturbationParams,
    mu=st.floats(1e-6, 0.5),
    q1=st.floats(0.5, 1.0),
    A2=st.floats(0.0, 0.1),
    cd=st.floats(1e-2, 1e4),
)


def test_derive_classical_identity():
    d = derive(PerturbationParams(mu=0.5))
    assert (d.epsilon, d.n, d.gamma, d.delta, d.W1) == (0.0, 1.0, 0.0, 1.0, 0.0)


def test_derive_drag_coefficient():
    d = derive(PerturbationParams(mu=0.3, q1=0.99, cd=100.0))
    assert d.W1 == pytest.approx(7e-5, rel=1e-12)


def test_derive_mean_motion():
    d = derive(PerturbationParams(mu=0.1, A2=0.01))
    assert d.n == pytest.approx(math.sqrt(1.015), rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mu": 0.0},
        {"mu": 0.6},
        {"mu": 0.1, "q1": 0.0},
        {"mu": 0.1, "q1": 1.1},
        {"mu": 0.1, "A2": -1e-3},
        {"mu": 0.1, "cd": 0.0},
        {"mu": float("nan")},
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        PerturbationParams(**kwargs)


@given(valid_params)
def test_derived_invariants(p):
    d = derive(p)
    assert d.n >= 1.0
    assert d.n * d.n - 1.0 - 1.5 * d.A2 == pytest.approx(0.0, abs=1e-15)
    assert d.delta ** 3 == pytest.approx(d.q1, rel=1e-15)
    assert d.W1 >= 0.0
    assert (d.W1 == 0.0) == (p.q1 == 1.0)


@given(valid_params)
def test_derive_deterministic(p):
    assert derive(p) == derive(p)


@given(valid_params)
def test_scale_zero_is_classical(p):
    d = derive(perturbation_scale(p, 0.0))
    assert (d.epsilon, d.A2, d.W1, d.n) == (0.0, 0.0, 0.0, 1.0)


def test_scale_one_is_identity():
    p = PerturbationParams(mu=0.1, q1=0.98, A2=0.01, cd=200.0)
    assert perturbation_scale(p, 1.0) == p


def test_scale_half():
    p = DerivedParams.from_values(0.1, 0.02, 0.01, 1e-4)
    d = perturbation_scale(p, 0.5)
    assert (d.epsilon, d.A2, d.W1) == pytest.approx((0.01, 0.005, 5e-5), rel=1e-14)


@given(valid_params, st.floats(0.0, 1.0))
def test_scale_is_linear(p, h):
    d0, d = derive(p), derive(perturbation_scale(p, h))
    assert d.epsilon == pytest.approx(h * d0.epsilon, rel=1e-9, abs=1e-15)
    assert d.A2 == pytest.approx(h * d0.A2, rel=1e-12, abs=1e-18)
    assert d.W1 == pytest.approx(h * d0.W1, rel=1e-9, abs=1e-15)


def test_scale_out_of_range():
    with pytest.raises(ParameterError):
        perturbation_scale(PerturbationParams(mu=0.1), 1.5)


def test_from_small_roundtrip():
    d = derive(PerturbationParams.from_small(0.1, epsilon=0.01, A2=0.002, W1=1e-4))
    assert (d.epsilon, d.A2, d.W1) == pytest.approx((0.01, 0.002, 1e-4), rel=1e-12)


def test_from_small_needs_epsilon_with_drag():
    with pytest.raises(ParameterError):
        PerturbationParams.from_small(0.1, epsilon=0.0, W1=1e-4)


def test_dict_roundtrip():
    p = PerturbationParams(mu=0.2, q1=0.97, A2=0.003, cd=50.0)
    assert PerturbationParams.from_dict(p.to_dict()) == p
    assert set(derive(p).to_dict()) >= {"epsilon", "n", "gamma", "delta", "W1"}


def test_perturbation_magnitude():
    d = DerivedParams.from_values(0.1, 0.01, 0.02, 0.005)
    assert perturbation_magnitude(d) == pytest.approx(0.02)


def test_grain_converter():
    assert q_from_grain(1e-4, 1.0) < 1.0
    with pytest.raises(ParameterError):
        q_from_grain(0.0, 1.0)
