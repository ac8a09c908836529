"""Linear stability and the linear normal form about L4.

Frequencies come from the characteristic quartic of the quadratic
Hamiltonian.  The first-order series for the frequency sum and product, the
two gamma-squared relations and the transformation entries ``J13 .. J24``
are evaluated as closed forms and checked against the quartic and against
the quadratic Hamiltonian itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from lpnorm.errors import ParameterError, ResonanceError, UnstableConfigurationError
from lpnorm.expansion import h2_form, quadratic_coeffs
from lpnorm.params import derive

SQRT3 = math.sqrt(3.0)

MU_C0 = 0.0385208965045513718
#: coefficients of eps, A2, eps*A2, nW1, eps*nW1 in the critical mass
MU_CRIT_COEFFS = (
    -0.221895916277307669,
    2.1038871010983331,
    0.493433373141671349,
    0.704139054372097028,
    0.401154273957540929,
)

#: |2 omega^2 - 1| below this makes k_j vanish
K_RESONANCE_TOL = 1e-9
#: |D| below this (relative to the quartic's scale) counts as a double root
D_RESONANCE_TOL = 1e-14


@dataclass(frozen=True)
class Frequencies:
    """Long- and short-period frequencies, ``omega1 > omega2 > 0``."""

    omega1: float
    omega2: float

    def __post_init__(self):
        if not (self.omega1 > 0.0 and self.omega2 > 0.0):
            raise ParameterError("frequencies must be positive")


@dataclass(frozen=True)
class StabilityReport:
    D: float
    stable: bool
    mu_crit: float
    margin: float
    lambda_squared: tuple


@dataclass(frozen=True)
class WhittakerTransform:
    J13: float
    J14: float
    J21: float
    J22: float
    J23: float
    J24: float
    l1: float
    l2: float
    k1: float
    k2: float


@dataclass(frozen=True)
class ActionAngle:
    I1: float
    I2: float
    phi1: float
    phi2: float

    def __post_init__(self):
        if self.I1 < 0.0 or self.I2 < 0.0:
            raise ParameterError("actions must be non-negative")


def _quartic(q, n):
    b = 2.0 * (q.E + q.F + n * n)
    c = 4.0 * q.E * q.F - q.G * q.G + n ** 4 - 2.0 * n * n * (q.E + q.F)
    return b, c


def discriminant(q, n):
    """``D = 4(E+F+n^2)^2 - 4{4EF - G^2 + n^4 - 2n^2(E+F)}``."""
    b, c = _quartic(q, n)
    return b * b - 4.0 * c


def lambda_squared(q, n):
    """Both roots of the quartic viewed as a quadratic in ``lambda^2``, most negative first."""
    b, c = _quartic(q, n)
    root = np.sqrt(complex(b * b - 4.0 * c))
    z1 = (-b - root) / 2.0
    z2 = (-b + root) / 2.0
    return (z1, z2) if (z1.real, z1.imag) <= (z2.real, z2.imag) else (z2, z1)


def characteristic_roots(q, n):
    """Four roots of ``lambda^4 + 2(E+F+n^2) lambda^2 + 4EF - G^2 + n^4 - 2n^2(E+F)``.

    Returned as ``[s1, -s1, s2, -s2]`` with ``s_j = sqrt(z_j)`` so the sum is
    exactly zero.
    """
    z1, z2 = lambda_squared(q, n)
    s1, s2 = np.sqrt(z1), np.sqrt(z2)
    return np.array([s1, -s1, s2, -s2], dtype=complex)


def matrix_roots(q, n):
    """Eigenvalues of the linear Hamiltonian vector field, sorted like :func:`characteristic_roots`."""
    from lpnorm.expansion import H2Form

    eig = np.linalg.eigvals(H2Form(q.E, q.F, q.G, n).system_matrix())
    target = characteristic_roots(q, n)
    out = []
    remaining = list(eig)
    for t in target:
        i = int(np.argmin([abs(e - t) for e in remaining]))
        out.append(remaining.pop(i))
    return np.array(out, dtype=complex)


def mu_crit_printed(p):
    """Critical mass ratio from the first-order stability inequality."""
    d = derive(p)
    c_eps, c_A2, c_epsA2, c_w, c_epsw = MU_CRIT_COEFFS
    w = d.nW1
    return (
        MU_C0
        + c_eps * d.epsilon
        + c_A2 * d.A2
        + c_epsA2 * d.epsilon * d.A2
        + c_w * w
        + c_epsw * d.epsilon * w
    )


def stability(p, coeffs=None):
    """Discriminant, stability verdict and critical mass.

    ``stable`` requires ``D > 0`` and both ``lambda^2`` roots real and negative,
    i.e. four purely imaginary characteristic roots.
    """
    d = derive(p)
    q = coeffs if coeffs is not None else quadratic_coeffs(d)
    D = discriminant(q, d.n)
    z1, z2 = lambda_squared(q, d.n)
    stable = bool(D > 0.0 and z1.imag == 0.0 and z2.imag == 0.0 and z1.real < 0.0 and z2.real < 0.0)
    mc = mu_crit_printed(d)
    return StabilityReport(D, stable, mc, mc - d.mu, (z1, z2))


def frequencies(p, coeffs=None):
    """``(omega1, omega2)`` from the quartic at the closed-form ``E, F, G``.

    Raises
    ------
    ResonanceError
        At a double root (``D = 0`` within rounding).
    UnstableConfigurationError
        When the roots are not purely imaginary; carries the four roots.
    """
    d = derive(p)
    q = coeffs if coeffs is not None else quadratic_coeffs(d)
    b, c = _quartic(q, d.n)
    D = b * b - 4.0 * c
    if abs(D) <= D_RESONANCE_TOL * max(1.0, b * b):
        raise ResonanceError(f"double root of the characteristic quartic (D={D!r})")
    rep = stability(d, q)
    if not rep.stable:
        raise UnstableConfigurationError(
            f"configuration is linearly unstable (D={D!r})", roots=characteristic_roots(q, d.n)
        )
    z1, z2 = rep.lambda_squared
    return Frequencies(math.sqrt(-z1.real), math.sqrt(-z2.real))


def frequency_sum_printed(p):
    """First-order series for ``omega1^2 + omega2^2``."""
    d = derive(p)
    e, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    return (
        1.0
        - g * e / 2.0
        + 3.0 * g * A2 / 2.0
        + 83.0 * e * A2 / 12.0
        + 299.0 * g * e * A2 / 144.0
        - w / (24.0 * r)
        + 5.0 * g * w / (8.0 * r)
        - 53.0 * e * w / (54.0 * r)
        - 5.0 * g * g * w / (24.0 * r)
        + 173.0 * g * e * w / (54.0 * r)
        - 3.0 * g * g * e * w / (36.0 * r)
    )


def frequency_product_printed(p):
    """First-order series for ``omega1^2 omega2^2``."""
    d = derive(p)
    e, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    return (
        27.0 / 16.0
        - 27.0 * g * g / 16.0
        + 9.0 * e / 8.0
        + 9.0 * g * e / 8.0
        - 3.0 * g * g * e / 8.0
        + 117.0 * g * A2 / 16.0
        - 241.0 * e * A2 / 32.0
        + 2515.0 * g * e * A2 / 192.0
        + 35.0 * w / (16.0 * r)
        - 55.0 * r * g * w / 16.0
        - 5.0 * r * g * g * w / 4.0
        - 1277.0 * e * w / (288.0 * r)
        + 5021.0 * g * e * w / (288.0 * r)
        + 991.0 * g * g * e * w / (48.0 * r)
    )


def gamma_squared_from_omega(p, omega):
    """Right-hand side of the gamma-squared relation in a single frequency."""
    d = derive(p)
    e, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    w2 = omega * omega
    c0 = (
        1.0
        + 4.0 * e / 9.0
        - 107.0 * e * A2 / 27.0
        + 2.0 * g * e / 3.0
        + 1579.0 * g * e * A2 / 324.0
        - 25.0 * w / (27.0 * r)
        - 55.0 * g * w / (9.0 * r)
        + 3809.0 * e * w / (486.0 * r)
        + 4961.0 * g * e * w / (486.0 * r)
    )
    c2 = (
        -16.0 / 27.0
        + 32.0 * e / 243.0
        + 8.0 * g * e / 27.0
        + 208.0 * A2 / 81.0
        - 8.0 * g * A2 / 27.0
        - 4868.0 * e * A2 / 729.0
        - 563.0 * g * e * A2 / 243.0
        + 296.0 * w / (243.0 * r)
        - 10.0 * g * w / (27.0 * r)
        - 15892.0 * e * w / (2187.0 * r)
        - 1864.0 * g * e * w / (729.0 * r)
    )
    c4 = (
        16.0 / 27.0
        - 32.0 * e / 243.0
        - 208.0 * A2 / 81.0
        - 1880.0 * e * A2 / 729.0
        - 2720.0 * w / (2187.0 * r)
        + 49552.0 * e * w / (6561.0 * r)
        - 80.0 * g * e * w / (2187.0 * r)
    )
    return c0 + c2 * w2 + c4 * w2 * w2


def gamma_squared_from_product(p, u):
    """Right-hand side of the gamma-squared relation in ``u = omega1 omega2``."""
    d = derive(p)
    e, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    return (
        1.0
        + 4.0 * e / 9.0
        - 107.0 * e * A2 / 27.0
        - 25.0 * w / (27.0 * r)
        + 3809.0 * e * w / (486.0 * r)
        + g
        * (
            2.0 * e / 3.0
            + 1579.0 * e * A2 / 324.0
            - 55.0 * g * w / (9.0 * r)
            + 4961.0 * g * e * w / (486.0 * r)
        )
        + (
            -16.0 / 27.0
            + 32.0 * e / 243.0
            + 208.0 * A2 / 81.0
            - 1880.0 * e * A2 / 729.0
            + 320.0 * w / (243.0 * r)
            - 15856.0 * e * w / (2187.0 * r)
        )
        * u
        * u
    )


def gamma_relation_residual(p, f):
    """Residuals ``gamma^2 - rhs`` of both relations.

    Returns
    -------
    tuple of float
        ``(res_omega1, res_omega2, res_u)``.
    """
    d = derive(p)
    g2 = d.gamma * d.gamma
    return (
        g2 - gamma_squared_from_omega(d, f.omega1),
        g2 - gamma_squared_from_omega(d, f.omega2),
        g2 - gamma_squared_from_product(d, f.omega1 * f.omega2),
    )


def whittaker_matrix(p, f):
    """Entries ``J13, J14, J21, J22, J23, J24`` of the normalizing transformation.

    Raises
    ------
    ResonanceError
        When ``|2 omega_j^2 - 1| < 1e-9`` so that ``k_j`` vanishes.
    """
    d = derive(p)
    e, A2, w, g, n = d.epsilon, d.A2, d.nW1, d.gamma, d.n
    r = SQRT3
    w1, w2 = f.omega1, f.omega2
    k1sq = 2.0 * w1 * w1 - 1.0
    k2sq = 1.0 - 2.0 * w2 * w2
    if abs(k1sq) < K_RESONANCE_TOL or abs(k2sq) < K_RESONANCE_TOL:
        raise ResonanceError("2 omega_j^2 = 1: transformation entries are singular")
    if k1sq < 0.0 or k2sq < 0.0:
        raise ResonanceError("frequency ordering omega2 < 1/sqrt(2) < omega1 is violated")
    l1sq = 4.0 * w1 * w1 + 9.0
    l2sq = 4.0 * w2 * w2 + 9.0
    l1, l2, k1, k2 = math.sqrt(l1sq), math.sqrt(l2sq), math.sqrt(k1sq), math.sqrt(k2sq)

    # brackets shared by several entries
    base_l_431 = e + 45.0 * A2 / 2.0 - 717.0 * A2 * e / 36.0 + (67.0 + 19.0 * g) / (12.0 * r) * w - (431.0 - 3.0 * g) / (27.0 * r) * w * e
    base_l_413 = e + 45.0 * A2 / 2.0 - 717.0 * A2 * e / 36.0 + (67.0 + 19.0 * g) / (12.0 * r) * w - (413.0 - 3.0 * g) / (27.0 * r) * w * e
    gam_l_293 = 3.0 * e - 293.0 * A2 / 36.0 + (187.0 + 27.0 * g) / (12.0 * r) * w - 2.0 * (247.0 + 3.0 * g) / (27.0 * r) * w * e
    base_k = e / 2.0 - 3.0 * A2 - 73.0 * A2 * e / 24.0 + (1.0 - 9.0 * g) / (24.0 * r) * w + (53.0 - 39.0 * g) / (54.0 * r) * w * e

    def gam_k(c):
        return e - 3.0 * A2 - 299.0 * A2 * e / 72.0 - (6.0 - 5.0 * g) / (12.0 * r) * w - c / (54.0 * r) * w * e

    J13 = l1 / (2.0 * w1 * k1) * (
        1.0
        - base_l_431 / (2.0 * l1sq)
        + g / (2.0 * l1sq) * (3.0 * e - 29.0 * A2 / 36.0 - (187.0 + 27.0 * g) / (12.0 * r) * w - 2.0 * (247.0 + 3.0 * g) / (27.0 * r) * w * e)
        - base_k / (2.0 * k1sq)
        - g / (4.0 * k1sq) * gam_k(266.0 - 93.0 * g)
        + e / (4.0 * l1sq * k1sq) * (3.0 * A2 / 4.0 + (33.0 + 14.0 * g) / (12.0 * r) * w)
        + g * e / (8.0 * l1sq * k1sq) * (347.0 * A2 / 36.0 - (43.0 - 8.0 * g) / (4.0 * r) * w)
    )
    J14 = l2 / (2.0 * w2 * k2) * (
        1.0
        - base_l_431 / (2.0 * l2sq)
        - g / (2.0 * l2sq) * gam_l_293
        - base_k / (2.0 * k2sq)
        + g / (2.0 * k2sq) * gam_k(268.0 - 9.0 * g)
        - e / (4.0 * l2sq * k2sq) * (33.0 * A2 / 4.0 + (1643.0 - 93.0 * g) / (216.0 * r) * w)
        + g * e / (4.0 * l2sq * k2sq) * (737.0 * A2 / 72.0 - (13.0 + 2.0 * g) / r * w)
    )
    J21 = -4.0 * n * w1 / (l1 * k1) * (
        1.0
        + base_l_413 / (2.0 * l1sq)
        - g / (2.0 * l1sq) * gam_l_293
        - base_k / (2.0 * k1sq)
        - g / (4.0 * k1sq) * gam_k(268.0 - 93.0 * g)
        + e / (8.0 * l1sq * k1sq) * (33.0 * A2 / 4.0 + (68.0 - 10.0 * g) / (24.0 * r) * w)
        + g * e / (8.0 * l1sq * k1sq) * (242.0 * A2 / 9.0 + (43.0 - 8.0 * g) / (4.0 * r) * w)
    )
    J22 = 4.0 * n * w2 / (l2 * k2) * (
        1.0
        + base_l_413 / (2.0 * l2sq)
        - g / (2.0 * l2sq) * gam_l_293
        + base_k / (2.0 * k2sq)
        - g / (4.0 * k2sq) * gam_k(268.0 - 93.0 * g)
        + e / (4.0 * l2sq * k2sq) * (33.0 * A2 / 4.0 + (34.0 + 5.0 * g) / (12.0 * r) * w)
        + g * e / (8.0 * l2sq * k2sq) * (75.0 * A2 / 2.0 + (43.0 - 8.0 * g) / (4.0 * r) * w)
    )

    head = (
        2.0 * e
        + 6.0 * A2
        + 37.0 * A2 * e / 2.0
        - (13.0 + g) / (2.0 * r) * w
        + 2.0 * (79.0 - 7.0 * g) / (9.0 * r) * w * e
        - g
        * (
            6.0
            + 2.0 * e / 3.0
            + 13.0 * A2
            - 33.0 * A2 * e / 2.0
            + (11.0 - g) / (2.0 * r) * w
            - (186.0 - g) / (9.0 * r) * w * e
        )
    )
    l_obl = 51.0 * A2 + (14.0 + 8.0 * g) / (3.0 * r) * w
    k_obl = 3.0 * A2 + (19.0 + 6.0 * g) / (6.0 * r) * w
    gam_l_135 = 6.0 * e + 135.0 * A2 - 808.0 * A2 * e / 9.0 - (67.0 + 19.0 * g) / (2.0 * r) * w - (755.0 + 19.0 * g) / (9.0 * r) * w * e
    gam_k_18 = 3.0 * e - 18.0 * A2 - 55.0 * A2 * e / 4.0 - (1.0 - 9.0 * g) / (4.0 * r) * w + (923.0 - 60.0 * g) / (12.0 * r) * w * e
    mixed = (34.0 - 5.0 * g) / (2.0 * r) * w

    J23 = r / (4.0 * w1 * l1 * k1) * (
        head
        + l_obl / (2.0 * l1sq)
        - e / k1sq * k_obl
        - g / (2.0 * l1sq) * gam_l_135
        - g / (2.0 * k1sq) * gam_k_18
        + g * e / (8.0 * l1sq * k1sq) * (9.0 * A2 / 2.0 + mixed)
    )
    # the last two brackets use l1, k1 exactly as printed
    J24 = r / (4.0 * w2 * l2 * k2) * (
        head
        - l_obl / (2.0 * l2sq)
        - e / k2sq * k_obl
        - g / (2.0 * l2sq) * gam_l_135
        - g / (2.0 * k1sq) * gam_k_18
        - g * e / (4.0 * l1sq * k1sq) * (99.0 * A2 / 2.0 + mixed)
    )
    return WhittakerTransform(J13, J14, J21, J22, J23, J24, l1, l2, k1, k2)


def orbit_state(f, J, I1, I2, phi1, phi2):
    """Position and velocity on the first-order orbit at angles ``(phi1, phi2)``.

    Angles advance as ``phi1' = omega1`` and ``phi2' = -omega2``.  Works
    elementwise on arrays.
    """
    w1, w2 = f.omega1, f.omega2
    a1 = np.sqrt(2.0 * w1 * I1)
    a2 = np.sqrt(2.0 * w2 * I2)
    b1 = np.sqrt(2.0 * I1 / w1)
    b2 = np.sqrt(2.0 * I2 / w2)
    c1, s1 = np.cos(phi1), np.sin(phi1)
    c2, s2 = np.cos(phi2), np.sin(phi2)
    x = J.J13 * a1 * c1 + J.J14 * a2 * c2
    y = J.J21 * b1 * s1 + J.J22 * b2 * s2 + J.J23 * a1 * c1 + J.J24 * a2 * c2
    # d/dt cos(phi1) = -w1 sin(phi1); d/dt cos(phi2) = +w2 sin(phi2)
    vx = -J.J13 * a1 * w1 * s1 + J.J14 * a2 * w2 * s2
    vy = J.J21 * b1 * w1 * c1 - J.J22 * b2 * w2 * c2 - J.J23 * a1 * w1 * s1 + J.J24 * a2 * w2 * s2
    return x, y, vx, vy


def first_order_orbit(t, f, J, I1, I2, phase1=0.0, phase2=0.0):
    """Displacement ``(x(t), y(t))`` from L4 along the first-order orbit."""
    if I1 < 0.0 or I2 < 0.0:
        raise ParameterError("actions must be non-negative")
    t = np.asarray(t, dtype=float)
    x, y, _, _ = orbit_state(f, J, I1, I2, f.omega1 * t + phase1, -f.omega2 * t + phase2)
    return x, y


_RESIDUAL_ACTIONS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.3, 0.7))


def normal_form_residual(p, n_angles=16, J=None):
    """Largest ``|H2 - (omega1 I1 - omega2 I2)| / (I1 + I2)`` on the first-order orbit.

    ``H2`` uses the closed-form ``E, F, G``; momenta are ``px = vx - n y``
    and ``py = vy + n x`` in displacement coordinates.  ``J`` defaults to
    the closed-form entries of :func:`whittaker_matrix`.
    """
    d = derive(p)
    form = h2_form(d)
    f = frequencies(d)
    if J is None:
        J = whittaker_matrix(d, f)
    phi = 2.0 * math.pi * np.arange(n_angles) / n_angles
    phi1, phi2 = np.meshgrid(phi, phi, indexing="ij")
    worst = 0.0
    for I1, I2 in _RESIDUAL_ACTIONS:
        x, y, vx, vy = orbit_state(f, J, I1, I2, phi1, phi2)
        h2 = form.value(x, y, vx - d.n * y, vy + d.n * x)
        target = f.omega1 * I1 - f.omega2 * I2
        worst = max(worst, float(np.max(np.abs(h2 - target))) / (I1 + I2))
    return worst


def whittaker_matrix_oracle(p, f=None, coeffs=None):
    """Transformation entries from the linear mode shapes, normalized exactly.

    Each mode ``x = A cos(theta)``, ``y = B sin(theta) + C cos(theta)`` of the
    linear equations fixes ``B/A`` and ``C/A``; the remaining scale is chosen
    so that ``H2`` equals ``omega1 I1`` on mode 1 and ``-omega2 I2`` on mode 2.
    Signs follow the closed forms (``J13, J14 > 0``).
    """
    d = derive(p)
    q = coeffs if coeffs is not None else quadratic_coeffs(d)
    if f is None:
        f = frequencies(d, q)
    n = d.n
    form = h2_form(d, q)
    entries = []
    for w, sign in ((f.omega1, 1.0), (f.omega2, -1.0)):
        den = 2.0 * q.F - n * n - w * w
        # J_sin relative to J_cos: theta' = sign * w
        j_sin = sign * 2.0 * n * w * w / den
        j_cos = -q.G / den
        trial = WhittakerTransform(1.0, 1.0, j_sin, j_sin, j_cos, j_cos, 0.0, 0.0, 0.0, 0.0)
        I1, I2 = (1.0, 0.0) if sign > 0 else (0.0, 1.0)
        x, y, vx, vy = orbit_state(f, trial, I1, I2, 0.3, 0.3)
        h = form.value(x, y, vx - n * y, vy + n * x)
        scale = math.sqrt((sign * w) / h)
        entries.append((scale, scale * j_sin, scale * j_cos))
    (J13, J21, J23), (J14, J22, J24) = entries
    l1 = math.sqrt(4.0 * f.omega1 ** 2 + 9.0)
    l2 = math.sqrt(4.0 * f.omega2 ** 2 + 9.0)
    k1 = math.sqrt(2.0 * f.omega1 ** 2 - 1.0)
    k2 = math.sqrt(1.0 - 2.0 * f.omega2 ** 2)
    return WhittakerTransform(J13, J14, J21, J22, J23, J24, l1, l2, k1, k2)
