import math

import pytest

from lpnorm import verify
from lpnorm.errors import ParameterError


def test_loglog_slope_exact_power():
    hs = verify.SCALING_STEPS
    assert verify.loglog_slope(hs, [3.0 * h * h for h in hs]) == pytest.approx(2.0, abs=1e-12)


def test_bisect_root():
    root = verify.bisect_root(lambda x: x * x - 2.0, 0.0, 2.0)
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_oracle_mu_crit_classical():
    assert verify.oracle_mu_crit() == pytest.approx(verify.MU_C0, abs=1e-10)


def test_render_format():
    results = [
        verify.CriterionResult(1, "one", True, ("a",)),
        verify.CriterionResult(2, "two", False, ()),
    ]
    assert verify.render(results) == "C1 PASS one\n    a\nC2 FAIL two\n1/2 criteria passed\n"


def test_unknown_suite():
    with pytest.raises(ParameterError):
        verify.run_criteria("nightly")
