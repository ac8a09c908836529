import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpnorm._backend import HAVE_NUMBA
from lpnorm.dynamics import (
    State,
    Trajectory,
    accel,
    dominant_frequencies,
    integrate,
    jacobi_like,
    potential,
)
from lpnorm.equilibria import triangular_point
from lpnorm.errors import IntegrationError, ParameterError, SingularConfigurationError
from lpnorm.params import DerivedParams, PerturbationParams, derive

SQRT3 = math.sqrt(3.0)


def _rest_at_l4(p):
    pt = triangular_point(p)
    return State(pt.x, pt.y, 0.0, 0.0)


def test_state_rejects_nonfinite():
    with pytest.raises(ParameterError):
        State(float("inf"), 0.0, 0.0, 0.0)


def test_accel_zero_at_equilibrium():
    p = DerivedParams.from_values(0.05, 1e-3, 1e-3, 1e-4)
    ax, ay = accel(_rest_at_l4(p), p)
    assert abs(ax) < 1e-12 and abs(ay) < 1e-12


def test_accel_nonzero_off_equilibrium():
    ax, ay = accel(State(0.5, SQRT3 / 2, 0.0, 0.0), PerturbationParams(mu=0.2))
    assert math.hypot(ax, ay) > 1e-3


def test_drag_at_rest():
    d = DerivedParams.from_values(0.1, 0.01, 0.0, 1e-3)
    d0 = DerivedParams.from_values(0.1, 0.01, 0.0, 0.0)
    s = State(0.3, 0.7, 0.0, 0.0)
    (ax, ay), (bx, by) = accel(s, d), accel(s, d0)
    r1sq = (s.x + d.mu) ** 2 + s.y ** 2
    assert ax - bx == pytest.approx(d.W1 * d.n * s.y / r1sq, rel=1e-10)
    assert ay - by == pytest.approx(-d.W1 * d.n * (s.x + d.mu) / r1sq, rel=1e-10)


@given(st.floats(-1.5, 1.5), st.floats(0.1, 1.5), st.floats(-1, 1), st.floats(-1, 1))
def test_accel_matches_potential_gradient(x, y, vx, vy):
    d = DerivedParams.from_values(0.1, 0.01, 0.005, 0.0)
    h = 1e-6
    gx = (potential(x + h, y, d) - potential(x - h, y, d)) / (2 * h)
    gy = (potential(x, y + h, d) - potential(x, y - h, d)) / (2 * h)
    ax, ay = accel(State(x, y, vx, vy), d)
    ex, ey = gx + 2 * d.n * vy, gy - 2 * d.n * vx
    assert ax == pytest.approx(ex, rel=1e-6, abs=1e-6)
    assert ay == pytest.approx(ey, rel=1e-6, abs=1e-6)


def test_accel_singular():
    with pytest.raises(SingularConfigurationError):
        accel(State(-0.1, 0.0, 0.0, 0.0), PerturbationParams(mu=0.1))


def test_jacobi_at_l4_is_minus_potential():
    p = PerturbationParams(mu=0.1)
    s = _rest_at_l4(p)
    assert jacobi_like(s, p) == -potential(s.x, s.y, p)


def test_equilibrium_stays_put():
    p = DerivedParams.from_values(0.01, 1e-3, 1e-3, 0.0)
    traj = integrate(_rest_at_l4(p), p, 100.0, 1.0)
    drift = np.abs(traj.states[:, :2] - traj.states[0, :2]).max()
    assert drift < 1e-8


def test_jacobi_conservation():
    p = PerturbationParams(mu=0.01, A2=0.001)
    s0 = _rest_at_l4(p)
    s0 = State(s0.x + 1e-3, s0.y, 0.0, 0.0)
    traj = integrate(s0, p, 100.0, 0.5, tol=1e-12)
    c = [jacobi_like(State.from_array(row), p) for row in traj.states]
    assert max(c) - min(c) <= 1e3 * 1e-12


def test_bounded_libration():
    p = PerturbationParams(mu=0.01)
    s0 = _rest_at_l4(p)
    traj = integrate(State(s0.x + 1e-5, s0.y, 0.0, 0.0), p, 300.0, 0.5)
    assert np.abs(traj.states[:, :2] - [s0.x, s0.y]).max() < 1e-3


def test_time_reversal():
    p = PerturbationParams(mu=0.01)
    s0 = _rest_at_l4(p)
    s0 = State(s0.x + 1e-3, s0.y - 1e-3, 0.0, 0.0)
    fwd = integrate(s0, p, 20.0, 20.0, tol=1e-13)
    end = fwd.states[-1]
    back = integrate(State.from_array(end), p, -20.0, 20.0, tol=1e-13)
    assert np.abs(back.states[-1] - s0.as_array()).max() <= 10 * 1e-12


def test_drag_dissipates_on_average():
    # diagnostic: with W1 > 0 the conservative energy does not stay constant
    p = DerivedParams.from_values(0.01, 1e-3, 0.0, 1e-4)
    s0 = _rest_at_l4(p)
    traj = integrate(State(s0.x + 1e-3, s0.y, 0.0, 0.0), p, 200.0, 1.0)
    c = np.array([jacobi_like(State.from_array(row), p) for row in traj.states])
    assert abs(c[-1] - c[0]) > 1e-12


def test_collision_raises_with_partial():
    p = PerturbationParams(mu=0.1)
    with pytest.raises(IntegrationError) as info:
        integrate(State(0.9 - 1e-3, 0.0, 0.0, 0.0), p, 10.0, 0.01, max_steps=20000)
    assert info.value.partial is not None


def test_integrate_rejects_bad_args():
    p = PerturbationParams(mu=0.1)
    s = _rest_at_l4(p)
    with pytest.raises(ParameterError):
        integrate(s, p, 0.0, 0.1)
    with pytest.raises(ParameterError):
        integrate(s, p, 1.0, -0.1)
    with pytest.raises(ParameterError):
        integrate(s, p, 1.0, 0.1, backend="gpu")


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree():
    p = PerturbationParams(mu=0.01, A2=0.001)
    s0 = _rest_at_l4(p)
    s0 = State(s0.x + 1e-3, s0.y, 0.0, 0.0)
    a = integrate(s0, p, 10.0, 0.5, backend="numba")
    b = integrate(s0, p, 10.0, 0.5, backend="python")
    assert np.abs(a.states - b.states).max() < 1e-13


def _synthetic(t, values):
    states = np.zeros((t.size, 4))
    states[:, 0] = values
    return Trajectory(t, states, derive(PerturbationParams(mu=0.1)))


def test_spectrum_synthetic():
    t = 0.1 * np.arange(4096)
    lines = dominant_frequencies(_synthetic(t, np.cos(0.96 * t) + 0.3 * np.cos(0.27 * t)), k=2)
    freqs = sorted(w for w, _ in lines)
    assert freqs == pytest.approx([0.27, 0.96], abs=1e-3)
    assert lines[0][0] == pytest.approx(0.96, abs=1e-3)
    assert lines[0][1] == pytest.approx(1.0, rel=0.05)


def test_spectrum_too_short():
    t = 0.1 * np.arange(10)
    with pytest.raises(ParameterError):
        dominant_frequencies(_synthetic(t, np.cos(t)))


def test_spectrum_bad_component():
    t = 0.1 * np.arange(100)
    with pytest.raises(ParameterError):
        dominant_frequencies(_synthetic(t, np.cos(t)), component="vx")


def test_spectrum_classical_libration():
    p = PerturbationParams(mu=0.01)
    s0 = _rest_at_l4(p)
    traj = integrate(State(s0.x + 1e-4, s0.y, 0.0, 0.0), p, 500.0, 0.05)
    freqs = sorted(w for w, _ in dominant_frequencies(traj, k=2))
    assert freqs == pytest.approx([0.268347748542513, 0.9633221090850994], abs=1e-3)
