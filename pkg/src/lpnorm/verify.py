"""Acceptance checks as a deterministic, printable suite.

Each check returns a :class:`CriterionResult`; :func:`render` turns a list of
them into a report with fixed number formatting and no timings, so two runs
on the same platform produce identical bytes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from lpnorm import poisson_series as ps
from lpnorm.birkhoff import (
    TOL_ROUTE,
    discrepancy_report,
    generic_second_order_solve,
    h3_coefficients,
)
from lpnorm.dynamics import State, dominant_frequencies, integrate
from lpnorm.equilibria import triangular_point
from lpnorm.errors import ParameterError
from lpnorm.expansion import cubic_coeffs, numeric_taylor_oracle, quadratic_coeffs
from lpnorm.linear_normal_form import (
    MU_C0,
    MU_CRIT_COEFFS,
    Frequencies,
    discriminant,
    frequencies,
    frequency_product_printed,
    frequency_sum_printed,
    gamma_relation_residual,
    mu_crit_printed,
    normal_form_residual,
)
from lpnorm.params import DerivedParams, perturbation_scale

SUITES = ("classical", "full")

#: perturbation direction of the scaling studies: (mu, epsilon, A2, W1)
SCALING_BASE = (0.02, 0.5, 0.5, 0.05)
SCALING_STEPS = (1e-2, 3e-3, 1e-3, 3e-4)
SLOPE_MIN = 1.9
#: residuals at or below this are treated as exact and exempt from the slope fit
RESIDUAL_FLOOR = 1e-13

SERIES_SEED = 20240229
SERIES_SAMPLES = 1000


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    lines: tuple = field(default_factory=tuple)


def _fmt(x):
    return f"{x:.10e}"


def loglog_slope(steps, residuals):
    """Least-squares slope of ``log residual`` against ``log h``."""
    h = np.log(np.asarray(steps, dtype=float))
    r = np.log(np.maximum(np.abs(np.asarray(residuals, dtype=float)), 1e-300))
    return float(np.polyfit(h, r, 1)[0])


def _order_check(name, steps, residuals):
    exact = max(abs(r) for r in residuals) <= RESIDUAL_FLOOR
    slope = loglog_slope(steps, residuals)
    ok = exact or slope >= SLOPE_MIN
    values = " ".join(_fmt(abs(r)) for r in residuals)
    return ok, f"{name:<12} slope={slope:+.4f} {'ok' if ok else 'LOW'} residuals=[{values}]"


def _scaled_params():
    mu, eps, A2, W1 = SCALING_BASE
    base = DerivedParams.from_values(mu, eps, A2, W1)
    return [perturbation_scale(base, h) for h in SCALING_STEPS]


# criterion 1 ------------------------------------------------------------


def classical_discriminant(mu):
    """Quartic discriminant at the closed-form ``E, F, G`` with no perturbation."""
    d = DerivedParams.from_values(mu)
    return discriminant(quadratic_coeffs(d), d.n)


def bisect_root(func, lo, hi, xtol=1e-15, max_iter=200):
    """Bisection for a sign change of ``func`` on ``[lo, hi]``."""
    flo, fhi = func(lo), func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ParameterError("bisection needs a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = func(mid)
        if fm == 0.0 or hi - lo <= xtol:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_critical_mass():
    d = DerivedParams.from_values(0.01)
    mc = mu_crit_printed(d)
    root = bisect_root(classical_discriminant, 0.01, 0.1)
    gap = abs(root - MU_C0)
    ok = mc == MU_C0 and gap <= 1e-12
    return CriterionResult(
        1,
        "critical mass constant",
        ok,
        (
            f"mu_crit(classical) = {mc:.17g} (expected {MU_C0:.17g})",
            f"D = 0 bisection root = {root:.17g}, |delta mu| = {_fmt(gap)} (tol 1e-12)",
        ),
    )


# criterion 2 ------------------------------------------------------------


def oracle_discriminant(mu, A2=0.0, nW1=0.0):
    """Quartic discriminant at ``E, F, G`` from the exact Taylor oracle."""
    n = math.sqrt(1.0 + 1.5 * A2)
    d = DerivedParams.from_values(mu, 0.0, A2, nW1 / n)
    table = numeric_taylor_oracle(d, order=2)
    return discriminant(table.quadratic(), d.n)


def oracle_mu_crit(A2=0.0, nW1=0.0, xtol=1e-13):
    return bisect_root(lambda mu: oracle_discriminant(mu, A2, nW1), 0.03, 0.05, xtol=xtol)


def check_sensitivities(h=1e-4):
    base = oracle_mu_crit()
    lines = [f"oracle mu_crit(0) = {base:.15g}, step h = {h:g}"]
    ok = True
    for label, kwargs, printed in (
        ("A2", {"A2": h}, MU_CRIT_COEFFS[1]),
        ("nW1", {"nW1": h}, MU_CRIT_COEFFS[3]),
    ):
        slope = (oracle_mu_crit(**kwargs) - base) / h
        rel = abs(slope - printed) / abs(printed)
        good = rel <= 0.05
        ok = ok and good
        lines.append(
            f"d mu_crit / d {label:<4} oracle={slope:+.8f} printed={printed:+.8f} "
            f"rel={rel:.4f} {'ok' if good else 'MISMATCH'} (tol 0.05)"
        )
    return CriterionResult(2, "stability-inequality coefficients", ok, tuple(lines))


# criterion 3 ------------------------------------------------------------


def analytic_classical_frequencies(mu):
    root = math.sqrt(1.0 - 27.0 * mu * (1.0 - mu))
    return math.sqrt((1.0 + root) / 2.0), math.sqrt((1.0 - root) / 2.0)


def check_frequencies():
    d = DerivedParams.from_values(0.01)
    f = frequencies(d)
    a1, a2 = analytic_classical_frequencies(0.01)
    err = max(abs(f.omega1 - a1), abs(f.omega2 - a2))
    grid = np.linspace(1e-3, MU_C0 * (1.0 - 1e-3), 100)
    bad = []
    for mu in grid:
        g = frequencies(DerivedParams.from_values(float(mu)))
        if not (0.0 < g.omega2 < 1.0 / math.sqrt(2.0) < g.omega1 < 1.0):
            bad.append(float(mu))
    ok = err <= 1e-12 and not bad
    return CriterionResult(
        3,
        "frequency ordering and values",
        ok,
        (
            f"mu=0.01 omega1={f.omega1:.15f} omega2={f.omega2:.15f} max err vs analytic = {_fmt(err)} (tol 1e-12)",
            f"ordering 0<omega2<1/sqrt2<omega1<1 on 100-point grid: {len(bad)} violations",
        ),
    )


# criterion 4 ------------------------------------------------------------


def series_residuals(d):
    """Residuals of every printed first-order series at ``d``, keyed by name."""
    f = frequencies(d)
    q = quadratic_coeffs(d)
    c = cubic_coeffs(d)
    table = numeric_taylor_oracle(d, order=3)
    qo = table.quadratic()
    To = table.cubic()
    t5_printed = c.T5.cubic_part().terms
    t5_exact = table.velocity_cubic().terms
    t5 = max(
        (abs(t5_printed.get(e, 0.0) - t5_exact.get(e, 0.0)) for e in set(t5_printed) | set(t5_exact)),
        default=0.0,
    )
    g1, g2, gu = gamma_relation_residual(d, f)
    return {
        "omega_sum": f.omega1 ** 2 + f.omega2 ** 2 - frequency_sum_printed(d),
        "omega_prod": (f.omega1 * f.omega2) ** 2 - frequency_product_printed(d),
        "gamma2_w1": g1,
        "gamma2_w2": g2,
        "gamma2_u": gu,
        "E": q.E - qo.E,
        "F": q.F - qo.F,
        "G": q.G - qo.G,
        "T1": c.T1 - To[0],
        "T2": c.T2 - To[1],
        "T3": c.T3 - To[2],
        "T4": c.T4 - To[3],
        "T5": t5,
    }


def check_series_orders():
    rows = [series_residuals(d) for d in _scaled_params()]
    lines = [
        "direction mu={} eps={} A2={} W1={} scaled by h in {}".format(
            *SCALING_BASE, ", ".join(f"{h:g}" for h in SCALING_STEPS)
        )
    ]
    ok = True
    for name in rows[0]:
        good, line = _order_check(name, SCALING_STEPS, [r[name] for r in rows])
        ok = ok and good
        lines.append(line)
    return CriterionResult(4, "printed-series order checks", ok, tuple(lines))


# criterion 5 ------------------------------------------------------------


def check_normal_form(include_scaling=True):
    lines = []
    ok = True
    for mu in (0.001, 0.01, 0.03):
        res = normal_form_residual(DerivedParams.from_values(mu))
        good = res <= 1e-10
        ok = ok and good
        lines.append(f"classical mu={mu:g} residual={_fmt(res)} {'ok' if good else 'HIGH'} (tol 1e-10)")
    if include_scaling:
        residuals = [normal_form_residual(d) for d in _scaled_params()]
        good, line = _order_check("normal_form", SCALING_STEPS, residuals)
        ok = ok and good
        lines.append(line)
    return CriterionResult(5, "normal-form exactness", ok, tuple(lines))


# criterion 6 ------------------------------------------------------------


def check_spectral(mu=0.01, amplitude=1e-4, t_end=500.0, dt_out=0.05):
    d = DerivedParams.from_values(mu)
    L4 = triangular_point(d)
    traj = integrate(State(L4.x + amplitude, L4.y, 0.0, 0.0), d, t_end, dt_out)
    peaks = sorted(freq for freq, _ in dominant_frequencies(traj, k=2))
    f = frequencies(d)
    e2 = abs(peaks[0] - f.omega2)
    e1 = abs(peaks[1] - f.omega1)
    ok = max(e1, e2) <= 1e-3
    return CriterionResult(
        6,
        "end-to-end frequency oracle",
        ok,
        (
            f"mu={mu:g} x-offset={amplitude:g} t_end={t_end:g} dt_out={dt_out:g}",
            f"omega1: spectrum={peaks[1]:.8f} quartic={f.omega1:.8f} err={_fmt(e1)}",
            f"omega2: spectrum={peaks[0]:.8f} quartic={f.omega2:.8f} err={_fmt(e2)} (tol 1e-3)",
        ),
    )


# criterion 7 ------------------------------------------------------------


def random_series(rng, max_degree=2, max_terms=5, exclude_critical=False):
    """Random canonical series of degree ``<= max_degree`` with unit-scale coefficients."""
    keys = [k for n in range(max_degree + 1) for k in ps.admissible_keys(n)]
    if exclude_critical:
        keys = [k for k in keys if (k[2], k[3]) not in ps.CRITICAL_HARMONICS]
    count = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(keys), size=count, replace=False)
    return ps.DAlembertSeries({keys[i]: float(rng.uniform(-1.0, 1.0)) for i in picks})


def close_scaled(a, b, scale, tol=1e-14):
    """Coefficientwise ``|a - b| <= tol * scale``."""
    return ps.allclose(a, b, rtol=0.0, atol=tol * max(scale, 1e-300))


def parity_ok(s):
    try:
        ps.DAlembertSeries(s.items())
    except ParameterError:
        return False
    return ps.DAlembertSeries(s.items()) == s


def check_series_algebra(samples=SERIES_SAMPLES, seed=SERIES_SEED):
    rng = np.random.default_rng(seed)
    f = Frequencies(*analytic_classical_frequencies(0.01))
    w = max(f.omega1, f.omega2)
    failures = {"ring": 0, "derivation": 0, "inversion": 0, "parity": 0, "canonical": 0}
    for _ in range(samples):
        a, b, c = (random_series(rng) for _ in range(3))
        na, nb, nc = ps.norm(a), ps.norm(b), ps.norm(c)
        scale = 4.0 * na * (nb + nc) * max(len(a), 1) * max(len(b), len(c), 1)
        ring = (
            ps.add(a, b) == ps.add(b, a)
            and close_scaled(ps.mul(a, b), ps.mul(b, a), scale)
            and close_scaled(ps.mul(a, ps.add(b, c)), ps.add(ps.mul(a, b), ps.mul(a, c)), scale)
            and ps.add(a, ps.scale(a, -1.0)).is_zero()
        )
        failures["ring"] += not ring
        lhs = ps.apply_D(ps.mul(a, b), f)
        rhs = ps.add(ps.mul(ps.apply_D(a, f), b), ps.mul(a, ps.apply_D(b, f)))
        failures["derivation"] += not close_scaled(lhs, rhs, 8.0 * w * scale)
        s = random_series(rng, max_degree=4, exclude_critical=True)
        back = ps.apply_delta12(ps.invert_delta(s, f), f)
        failures["inversion"] += not ps.allclose(back, s, rtol=1e-12)
        outputs = (ps.mul(a, b), ps.apply_D(a, f), ps.apply_D2(b, f), ps.add(a, c), back)
        failures["parity"] += not all(parity_ok(o) for o in outputs)
        failures["canonical"] += ps.DAlembertSeries(a.items()) != a
    exact = all(
        ps.delta_pq(1, 0, g) == 0.0 and ps.delta_pq(0, 1, g) == 0.0
        for g in (f, Frequencies(0.9, 0.3), Frequencies(1.0 / 3.0, 0.1))
    )
    ok = exact and not any(failures.values())
    lines = [f"{samples} random triples, seed {seed}"]
    lines += [f"{k:<11} failures={v}" for k, v in failures.items()]
    lines.append(f"Delta_10 = Delta_01 = 0 exactly: {exact}")
    return CriterionResult(7, "series-engine algebra", ok, tuple(lines))


# criterion 8 ------------------------------------------------------------


def check_second_order(include_perturbed=True):
    d = DerivedParams.from_values(0.01)
    f = frequencies(d)
    sol = generic_second_order_solve(d, f)
    h3 = h3_coefficients(d, f, sol.B1, sol.B2)
    report = discrepancy_report(d, f)
    worst = max(e["rel_closed_generic"] for e in report)
    inconsistent = [e["name"] for e in report if not e["consistent"]]
    crit_ok = sol.critical_relative <= 1e-10
    h3_ok = h3.relative <= 1e-8
    routes_ok = worst <= TOL_ROUTE
    lines = [
        f"classical mu=0.01 critical part relative={_fmt(sol.critical_relative)} {'ok' if crit_ok else 'HIGH'} (tol 1e-10)",
        f"H3 max|A|/|H3| = {_fmt(h3.relative)} {'ok' if h3_ok else 'HIGH'} (tol 1e-8)",
        f"closed vs generic max relative = {_fmt(worst)} {'ok' if routes_ok else 'MISMATCH'} (tol {TOL_ROUTE:g})",
        f"inconsistent coefficients: {len(inconsistent)}/20",
    ]
    for e in report:
        lines.append(
            f"  {e['name']:<4} closed={e['closed']:+.10e} generic={e['generic']:+.10e} "
            f"oracle={e['oracle']:+.10e} rel={e['rel_closed_generic']:.3e}"
        )
    if include_perturbed:
        dp = _scaled_params()[0]
        perturbed = discrepancy_report(dp)
        n_bad = sum(not e["consistent"] for e in perturbed)
        lines.append(f"perturbed (h={SCALING_STEPS[0]:g}) discrepancy report: {n_bad}/20 coefficients flagged")
    return CriterionResult(8, "second-order normalization", crit_ok and h3_ok and routes_ok, tuple(lines))


# suite ------------------------------------------------------------------


def _checks(suite):
    if suite not in SUITES:
        raise ParameterError(f"suite must be one of {SUITES}, got {suite!r}")
    full = suite == "full"
    checks = [check_critical_mass]
    if full:
        checks.append(check_sensitivities)
    checks.append(check_frequencies)
    if full:
        checks.append(check_series_orders)
    checks += [
        lambda: check_normal_form(include_scaling=full),
        check_spectral,
        check_series_algebra,
        lambda: check_second_order(include_perturbed=full),
    ]
    return checks


def run_criteria(suite="full"):
    """Criteria 1-8 of ``suite`` (the classical suite skips 2 and 4)."""
    return [check() for check in _checks(suite)]


def check_determinism(first, suite):
    second = render(run_criteria(suite))
    same = render(first) == second
    return CriterionResult(9, "determinism", same, (f"two runs of suite '{suite}' byte-identical: {same}",))


def run_suite(suite="full"):
    results = run_criteria(suite)
    results.append(check_determinism(results, suite))
    return results


def render(results):
    out = []
    for r in results:
        out.append(f"C{r.number} {'PASS' if r.passed else 'FAIL'} {r.title}")
        out.extend(f"    {line}" for line in r.lines)
    passed = sum(r.passed for r in results)
    out.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(out) + "\n"
