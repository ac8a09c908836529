import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpnorm.equilibria import (
    EquilibriumPoint,
    epsilon_form_point,
    refine_point,
    residuals,
    series_point,
    shift_constants,
    triangular_point,
)
from lpnorm.errors import ParameterError, SingularConfigurationError
from lpnorm.params import DerivedParams, PerturbationParams, perturbation_scale
from lpnorm.verify import SCALING_STEPS, loglog_slope

SQRT3 = math.sqrt(3.0)


def test_series_point_classical():
    pt = series_point(PerturbationParams(mu=0.1))
    assert (pt.x, pt.y) == pytest.approx((0.4, SQRT3 / 2), abs=1e-15)


def test_series_point_radiation_only():
    d = DerivedParams.from_values(0.01, 5e-4)
    pt = series_point(d)
    assert pt.x == pytest.approx(d.delta ** 2 / 2 - 0.01, rel=1e-15)
    # pure radiation is exact in closed form
    assert max(map(abs, residuals(pt, d))) < 1e-14


def test_series_point_l5_mirror():
    p = PerturbationParams(mu=0.1, A2=0.01)
    l4, l5 = series_point(p, "L4"), series_point(p, "L5")
    assert (l5.x, l5.y) == pytest.approx((l4.x, -l4.y), abs=1e-15)


def test_bad_branch():
    with pytest.raises(ParameterError):
        series_point(PerturbationParams(mu=0.1), "L3")
    with pytest.raises(SingularConfigurationError):
        EquilibriumPoint(0.4, -0.1, "L4", "series")


def test_drag_singular_at_tiny_mu():
    with pytest.raises(SingularConfigurationError):
        series_point(DerivedParams.from_values(1e-7, 1e-3, 0.0, 1e-5))


def test_epsilon_form_classical():
    pt = epsilon_form_point(PerturbationParams(mu=0.2))
    assert (pt.x, pt.y) == pytest.approx((0.3, SQRT3 / 2), abs=1e-15)


def test_epsilon_form_radiation():
    pt = epsilon_form_point(DerivedParams.from_values(0.2, 0.01))
    assert pt.x == pytest.approx(0.3 - 0.01 / 3, rel=1e-14)


def test_shift_constants():
    s = shift_constants(PerturbationParams(mu=0.2))
    assert (s.a, s.b) == pytest.approx((0.5, SQRT3 / 2), abs=1e-15)
    s = shift_constants(DerivedParams.from_values(0.2, 0.03))
    assert s.a == pytest.approx(0.49, rel=1e-14)
    assert s.b == pytest.approx(SQRT3 / 2 * (1 - 0.03 * 2 / 9), rel=1e-14)


def test_shift_matches_epsilon_form():
    d = DerivedParams.from_values(0.05, 1e-3, 2e-3, 1e-4)
    s, pt = shift_constants(d), epsilon_form_point(d)
    assert s.a - d.mu == pytest.approx(pt.x, abs=1e-6)
    assert s.b == pytest.approx(pt.y, abs=1e-12)


def test_refine_classical_fixed_point():
    p = PerturbationParams(mu=0.1)
    pt = refine_point(EquilibriumPoint(0.4, SQRT3 / 2, "L4", "series"), p)
    assert (pt.x, pt.y) == pytest.approx((0.4, SQRT3 / 2), abs=1e-12)
    assert pt.method == "refined"


@given(
    st.floats(0.01, 0.5),
    st.floats(0.0, 0.01),
    st.floats(0.0, 0.01),
    st.floats(0.0, 1e-4),
    st.sampled_from(["L4", "L5"]),
)
def test_refined_residual_postcondition(mu, eps, A2, W1, branch):
    d = DerivedParams.from_values(mu, eps, A2, W1)
    pt = triangular_point(d, branch, tol=1e-12)
    assert max(map(abs, residuals(pt, d))) <= 1e-12


def test_refine_rejects_bad_tol():
    p = PerturbationParams(mu=0.1)
    with pytest.raises(ParameterError):
        refine_point(series_point(p), p, tol=0.0)


def _gap(point_fn, base, h):
    d = perturbation_scale(base, h)
    a, b = point_fn(d), triangular_point(d)
    return math.hypot(a.x - b.x, a.y - b.y)


def test_series_point_second_order_without_drag():
    # [DERIVED] radiation and oblateness only: closed form is second-order accurate
    base = DerivedParams.from_values(0.02, 0.5, 0.5, 0.0)
    gaps = [_gap(series_point, base, h) for h in SCALING_STEPS]
    assert loglog_slope(SCALING_STEPS, gaps) >= 1.9


def test_epsilon_form_second_order_without_drag():
    base = DerivedParams.from_values(0.02, 0.5, 0.5, 0.0)
    gaps = [_gap(epsilon_form_point, base, h) for h in SCALING_STEPS]
    assert loglog_slope(SCALING_STEPS, gaps) >= 1.9


@pytest.mark.xfail(strict=True, reason="printed nW1 terms of the epsilon-form point are wrong; see ledger")
def test_epsilon_form_second_order_with_drag():
    base = DerivedParams.from_values(0.02, 0.5, 0.5, 0.05)
    gaps = [_gap(epsilon_form_point, base, h) for h in SCALING_STEPS]
    assert loglog_slope(SCALING_STEPS, gaps) >= 1.9


def test_series_point_refined_gap_quadratic_grid():
    # |refined - series| <= C (eps^2 + A2^2 + (nW1)^2) over a grid, C fitted
    ratios = []
    for eps in (1e-3, 3e-3):
        for A2 in (1e-3, 3e-3):
            d = DerivedParams.from_values(0.05, eps, A2, 0.0)
            a, b = series_point(d), triangular_point(d)
            ratios.append(math.hypot(a.x - b.x, a.y - b.y) / (eps ** 2 + A2 ** 2 + d.nW1 ** 2))
    assert max(ratios) / min(ratios) < 10.0
    assert np.all(np.isfinite(ratios))
