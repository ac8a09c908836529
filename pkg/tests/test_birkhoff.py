import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpnorm import birkhoff as bk
from lpnorm import poisson_series as ps
from lpnorm.errors import SmallDivisorError
from lpnorm.expansion import exact_l3_polynomial, numeric_taylor_oracle
from lpnorm.linear_normal_form import MU_C0, Frequencies, frequencies, whittaker_matrix
from lpnorm.params import DerivedParams, PerturbationParams, derive
from lpnorm.poisson_series import DAlembertSeries

SQRT3 = math.sqrt(3.0)
SUPPORT = {(0, 0), (2, 0), (0, 2), (1, 1), (1, -1)}


@pytest.fixture(scope="module")
def setup():
    d = derive(PerturbationParams(mu=0.01))
    f = frequencies(d)
    return d, f, whittaker_matrix(d, f)


@pytest.fixture(scope="module")
def generic(setup):
    d, f, J = setup
    return bk.generic_second_order_solve(d, f, J)


@pytest.fixture(scope="module")
def exact(setup):
    d, f, J = setup
    l3 = exact_l3_polynomial(numeric_taylor_oracle(d))
    return bk.generic_second_order_solve(d, f, J, l3=l3)


def test_drag_entries_vanish_without_drag():
    t = bk.fg_tables(DerivedParams.from_values(0.02, 1e-2, 1e-2, 0.0))
    assert (t.F.c1, t.F.c1p, t.F.c1pp, t.G.c1, t.G.c1p, t.G.c1pp) == (0.0,) * 6


def test_classical_table_entries():
    g = 1 - 2 * 0.01
    t = bk.fg_tables(PerturbationParams(mu=0.01))
    assert t.F.c2 == pytest.approx(21 * g / 16, rel=1e-15)
    assert t.G.c2pp == pytest.approx(9 * SQRT3 / 16, rel=1e-15)
    assert len(t.as_dict()) == 24
    assert len(bk.table_values(t)) == 24


def test_r1_direct_evaluation(setup):
    d, f, J = setup
    F = bk.fg_tables(d).F
    w1, w2 = f.omega1, f.omega2
    r1 = (J.J13 ** 2 * w1 * F.c4 + J.J13 * J.J23 * w1 * F.c4p
          + (J.J21 ** 2 / w1 + J.J23 ** 2 * w1) * F.c4pp) / (w1 * w1 * w2 * w2)
    assert bk.rs_coefficients(d, f, J).r[0] == pytest.approx(r1, rel=1e-13)


def test_small_divisor_named(setup):
    _, _, J = setup
    F = bk.fg_tables(PerturbationParams(mu=0.01)).F
    with pytest.raises(SmallDivisorError) as info:
        bk.r_coefficients(Frequencies(0.3, 0.6), J, F)
    assert "4 omega1^2 - omega2^2" in str(info.value)


def test_s_is_r_with_g_table(setup):
    d, f, J = setup
    t = bk.fg_tables(d)
    assert bk.rs_coefficients(d, f, J).s == bk.r_coefficients(f, J, t.G)
    swapped = bk.FGTables(t.G, t.F)
    assert bk.rs_coefficients(d, f, J, swapped).r == bk.rs_coefficients(d, f, J).s


def test_closed_form_zero():
    x, y = bk.b2_closed_form(bk.RSCoefficients((0.0,) * 10, (0.0,) * 10))
    assert x.is_zero() and y.is_zero()


def test_closed_form_support_and_sign(setup):
    d, f, J = setup
    rs = bk.rs_coefficients(d, f, J)
    x, y = bk.b2_closed_form(rs)
    assert set(x.keys()) <= set(bk.RS_KEYS)
    assert ps.critical_part(x).is_zero() and ps.critical_part(y).is_zero()
    assert bk.rs_from_series(ps.neg(y)) == pytest.approx(rs.s, rel=1e-15)


def test_generic_critical_part_classical(generic):
    assert generic.critical_relative <= 1e-10
    for s in (generic.Phi2, generic.Psi2):
        assert ps.norm(ps.critical_part(s)) <= 1e-10 * ps.norm(s)


def test_generic_support(generic):
    for s in generic.B2:
        for n, m, p, q, _ in s.keys():
            assert n == 2 and (p, q) in SUPPORT


def test_inversion_reproduces_phi(setup, generic):
    _, f, _ = setup
    back = ps.apply_delta12(generic.B2[0], f)
    assert ps.norm(back - generic.Phi2) <= 1e-12 * ps.norm(generic.Phi2)
    back = ps.apply_delta12(ps.neg(generic.B2[1]), f)
    assert ps.norm(back - generic.Psi2) <= 1e-12 * ps.norm(generic.Psi2)


def test_exact_cubic_constant_terms(exact):
    # [DERIVED] generic solve on the exact cubic Lagrangian; the constant terms
    # agree with the windowed mean offset of the full nonlinear integration
    values = bk.rs_of_solution(exact)
    assert values["r"][:2] == pytest.approx((-4.902475195993823, -17.59903994325396), rel=1e-6)
    assert values["s"][:2] == pytest.approx((-1.4374457870593607, -3.008681989437012), rel=1e-6)


def test_tables_route_matches_closed_constant_terms(setup):
    d, f, J = setup
    closed = bk.rs_coefficients(d, f, J)
    tables = bk.rs_of_solution(bk.table_second_order_solve(d, f, J))
    assert tables["r"][:2] == pytest.approx(closed.r[:2], rel=1e-12)
    assert tables["s"][:2] == pytest.approx(closed.s[:2], rel=1e-12)


@pytest.mark.xfail(strict=True, reason="printed r/s closed forms disagree with the generic solve; see ledger")
def test_closed_matches_generic_classically(setup, generic):
    d, f, J = setup
    closed = bk.rs_coefficients(d, f, J)
    values = bk.rs_of_solution(generic)
    assert values["r"] == pytest.approx(closed.r, rel=1e-6)
    assert values["s"] == pytest.approx(closed.s, rel=1e-6)


def test_h3_vanishes_classically(setup, generic):
    d, f, J = setup
    h3 = bk.h3_coefficients(d, f, generic.B1, generic.B2)
    assert h3.relative <= 1e-8
    assert h3.reference > 0.0


@given(st.floats(1e-3, 0.9 * MU_C0), st.floats(0.0, 1e-3), st.floats(0.0, 1e-3))
def test_h3_vanishes_for_any_input(mu, eps, A2):
    d = DerivedParams.from_values(mu, eps, A2, 0.0)
    f = frequencies(d)
    B1 = bk.first_order_series(f, whittaker_matrix(d, f))
    h3 = bk.h3_coefficients(d, f, B1, None)
    assert max(abs(h3.A30), abs(h3.A21), abs(h3.A12), abs(h3.A03)) == 0.0


@pytest.mark.xfail(strict=True, reason="the angle average of H3 vanishes by parity even without B2; see ledger")
def test_h3_ablation_nonzero(setup, generic):
    d, f, _ = setup
    h3 = bk.h3_coefficients(d, f, generic.B1, None)
    assert h3.relative > 1e-8


def test_h3_zero_inputs(setup):
    d, f, _ = setup
    zero = (DAlembertSeries(), DAlembertSeries())
    h3 = bk.h3_coefficients(d, f, zero, zero)
    assert (h3.A30, h3.A21, h3.A12, h3.A03, h3.reference) == (0.0,) * 5


def test_discrepancy_report_structure(setup):
    d, f, J = setup
    report = bk.discrepancy_report(d, f, J, oracle=False)
    assert [e["name"] for e in report] == [f"r{i}" for i in range(1, 11)] + [f"s{i}" for i in range(1, 11)]
    for e in report:
        assert {"closed", "tables", "generic", "rel_closed_generic", "consistent"} <= set(e)
        assert e["consistent"] == (e["rel_closed_generic"] <= bk.TOL_ROUTE)


def test_discrepancy_report_perturbed():
    d = DerivedParams.from_values(0.02, 1e-3, 1e-3, 1e-4)
    report = bk.discrepancy_report(d, oracle=True)
    assert len(report) == 20
    assert all(math.isfinite(e["oracle"]) for e in report)


def test_rs_series_roundtrip():
    values = tuple(float(i + 1) for i in range(10))
    assert bk.rs_from_series(bk.series_from_rs(values)) == values
