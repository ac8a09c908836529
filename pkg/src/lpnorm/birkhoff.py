"""Second-order normalization about L4.

The second-order coordinate corrections ``B2`` are built three ways:

``closed``
    the printed closed forms ``r1 .. r10`` (and ``s_i``, the same formulas
    fed the ``G`` tables) evaluated verbatim;
``tables``
    the series engine applied to the printed ``F``/``G`` tables, using the
    structure ``Phi2 = D^3 Q1 + D^2 Q2 + D Q3 + Q4`` with
    ``Qk = Fk x^2 + Fk' x y + Fk'' y^2`` on the first-order orbit;
``generic``
    the series engine applied to the cubic Lagrangian itself: ``X2 = dL3/dx``
    and ``Y2 = dL3/dy`` on the first-order orbit, then ``Phi2``, ``Psi2`` and
    division by ``Delta_{p,q}``.

Comparing routes localizes inconsistencies between the printed formulas.
"""

import math
from dataclasses import astuple, dataclass, fields

from lpnorm import poisson_series as ps
from lpnorm.errors import CriticalTermError, SmallDivisorError
from lpnorm.expansion import cubic_coeffs, exact_l3_polynomial, numeric_taylor_oracle, quadratic_coeffs
from lpnorm.linear_normal_form import frequencies, whittaker_matrix
from lpnorm.params import derive
from lpnorm.poisson_series import COS, SIN, DAlembertSeries

SQRT3 = math.sqrt(3.0)

#: critical harmonics above this fraction of the largest harmonic are structural
TOL_CRIT = 1e-8
#: closed and generic coefficients agreeing to this relative level are consistent
TOL_ROUTE = 1e-6

#: series key of the harmonic multiplying r_i (and s_i), in index order
RS_KEYS = (
    (2, 0, 0, 0, COS),
    (2, 2, 0, 0, COS),
    (2, 0, 2, 0, COS),
    (2, 2, 0, 2, COS),
    (2, 1, 1, -1, COS),
    (2, 1, 1, 1, COS),
    (2, 0, 2, 0, SIN),
    (2, 2, 0, 2, SIN),
    (2, 1, 1, -1, SIN),
    (2, 1, 1, 1, SIN),
)


@dataclass(frozen=True)
class CoefficientTable:
    """One of the two printed tables: ``X1..X4``, ``X1'..X4'``, ``X1''..X4''``.

    ``Xk`` multiplies ``x^2``, ``Xk'`` multiplies ``x y`` and ``Xk''``
    multiplies ``y^2`` in the ``D^(4-k)`` part of ``Phi2`` (``F`` table) or
    ``Psi2`` (``G`` table).
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c1p: float
    c2p: float
    c3p: float
    c4p: float
    c1pp: float
    c2pp: float
    c3pp: float
    c4pp: float

    def quadratic(self, k):
        """``(x^2, x y, y^2)`` weights of ``Qk``."""
        return (getattr(self, f"c{k}"), getattr(self, f"c{k}p"), getattr(self, f"c{k}pp"))


@dataclass(frozen=True)
class FGTables:
    F: CoefficientTable
    G: CoefficientTable

    def as_dict(self):
        out = {}
        for label, table in (("F", self.F), ("G", self.G)):
            for fld in fields(table):
                out[label + fld.name[1:]] = getattr(table, fld.name)
        return out


@dataclass(frozen=True)
class RSCoefficients:
    r: tuple
    s: tuple


@dataclass(frozen=True)
class H3Coefficients:
    """Angle averages of the ``I1^{3/2}, I1 I2^{1/2}, I1^{1/2} I2, I2^{3/2}`` parts of ``H3``.

    ``reference`` is the largest coefficient of the full degree-3 series
    ``H3`` and ``relative`` is ``max|A| / reference``.
    """

    A30: float
    A21: float
    A12: float
    A03: float
    reference: float
    relative: float


@dataclass(frozen=True)
class SecondOrderSolution:
    B1: tuple
    B2: tuple
    Phi2: DAlembertSeries
    Psi2: DAlembertSeries
    critical_relative: float


# printed tables ---------------------------------------------------------


def fg_tables(p):
    """Evaluate the 24 printed table entries.

    A doubled ``A2`` in the mixed ``A2 epsilon`` terms of ``F4``, ``F4'``,
    ``F4''``, ``G3``, ``G4'`` and ``G4''`` is read as a single ``A2``.
    """
    d = derive(p)
    e, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    we = w * e

    F1 = -we / 6.0
    F2 = 3.0 / 32.0 * (
        16.0 * e / 3.0 + 6.0 * A2 - 979.0 * A2 * e / 18.0
        + (143.0 + 9.0 * g) / (6.0 * r) * w + (555.0 + 376.0 * g) / (27.0 * r) * we
        + g * (
            14.0 + 4.0 * e / 3.0 + 25.0 * A2 - 1507.0 * A2 * e / 18.0
            - (215.0 + 29.0 * g) / (6.0 * r) * w - 2.0 * (1174.0 + 169.0 * g) / (27.0 * r) * we
        )
    )
    F3 = 3.0 * r / 16.0 * (
        14.0 - 16.0 * e / 3.0 + 23.0 * A2 / 2.0 - 104.0 * A2 * e / 9.0
        + 115.0 * (1.0 + g) / (18.0 * r) * w - 2.0 * (439.0 - 68.0 * g) / (27.0 * r) * we
        + g * (
            32.0 * e / 3.0 + 40.0 * A2 - 310.0 * A2 * e / 9.0
            + (511.0 + 53.0 * g) / (6.0 * r) * w - (2519.0 - 249.0 * g) / (27.0 * r) * we
        )
    )
    F4 = -3.0 / 256.0 * (
        364.0 + 420.0 * A2 - 17801.0 * A2 * e / 9.0
        + (2821.0 + 189.0 * g) / (3.0 * r) * w - (23077.0 + 9592.0 * g) / (27.0 * r) * we
        + 28.0 * g * (
            23.0 + 100.0 * e / 21.0 + 849.0 * A2 / 14.0 + 59.0 * A2 * e / 7.0
            - (125.0 + 38.0 * g) / (6.0 * r) * w - (87613.0 - 213.0 * g) / (27.0 * r) * we
        )
    )
    F1p = we / (3.0 * r)
    F2p = 3.0 * r / 16.0 * (
        14.0 - 16.0 * e / 3.0 + A2 - 1367.0 * A2 * e / 18.0
        + 115.0 * (1.0 + g) / (18.0 * r) * w - (863.0 - 136.0 * g) / (27.0 * r) * we
        + g * (
            32.0 * e / 3.0 + 40.0 * A2 - 382.0 * A2 * e / 9.0
            + (511.0 + 53.0 * g) / (6.0 * r) * w - (2519.0 - 24.0 * g) / (27.0 * r) * we
        )
    )
    F3p = -9.0 / 8.0 * (
        8.0 * e / 3.0 + 203.0 * A2 / 6.0 - 721.0 * A2 * e / 54.0
        - (105.0 + 15.0 * g) / (18.0 * r) * w - (319.0 - 114.0 * g) / (81.0 * r) * we
        + g * (
            2.0 - 4.0 * e / 9.0 - 173.0 * A2 / 6.0 - 781.0 * A2 * e / 9.0
            + (197.0 + 23.0 * g) / (18.0 * r) * w - (265.0 - 32.0 * g) / (81.0 * r) * we
        )
    )
    F4p = -3.0 * r / 16.0 * (
        392.0 - 532.0 * e / 3.0 + 1918.0 * A2 / 3.0 - 28582.0 * A2 * e / 9.0
        + (203.0 + 1211.0 * g) / (9.0 * r) * w + (949.0 + 4378.0 * g) / (27.0 * r) * we
        + 28.0 * g * (
            108.0 * e / 7.0 + 4037.0 * A2 / 84.0 - 611.0 * A2 * e / 21.0
            + (8397.0 + 919.0 * g) / (84.0 * r) * w - (92266.0 - 1869.0 * g) / (27.0 * r) * we
        )
    )
    F1pp = we / 6.0
    F2pp = -9.0 / 32.0 * (
        8.0 * e / 3.0 + 203.0 * A2 / 6.0 - 625.0 * A2 * e / 54.0
        - (105.0 + 15.0 * g) / (18.0 * r) * w - (307.0 - 114.0 * g) / (81.0 * r) * we
        + g * (
            2.0 - 4.0 * e / 9.0 + 55.0 * A2 / 2.0 - 797.0 * A2 * e / 54.0
            + (197.0 + 23.0 * g) / (18.0 * r) * w - (211.0 - 32.0 * g) / (81.0 * r) * we
        )
    )
    F3pp = -9.0 * r / 16.0 * (
        2.0 - 8.0 * e / 3.0 + 55.0 * A2 / 6.0 - 134.0 * A2 * e / 3.0
        - (37.0 + g) / (18.0 * r) * w - (93.0 + 226.0 * g) / (81.0 * r) * we
        + g * (
            4.0 * e + 169.0 * A2 * e / 27.0
            + (241.0 + 45.0 * g) / (18.0 * r) * w - (1558.0 - 126.0 * g) / (81.0 * r) * we
        )
    )
    F4pp = 9.0 / 256.0 * (
        212.0 * e / 3.0 + 2950.0 * A2 / 3.0 - 1370.0 * A2 * e / 27.0
        - (771.0 + 237.0 * g) / (9.0 * r) * w - 2.0 * (1907.0 - 984.0 * g) / (81.0 * r) * we
        + 28.0 * g * (
            11.0 / 7.0 + 4.0 * e / 9.0 - 152.0 * A2 / 7.0 - 36965.0 * A2 * e / 504.0
            + (2569.0 + 277.0 * g) / (252.0 * r) * w + (22603.0 + 4396.0 * g) / (1134.0 * r) * we
        )
    )

    G1 = -we / 6.0
    G2 = 3.0 / 32.0 * (
        14.0 - 16.0 * e / 3.0 + A2 - 1367.0 * A2 * e / 18.0
        + 115.0 * (1.0 + g) / (18.0 * r) * w - (863.0 - 136.0 * g) / (27.0 * r) * we
        + g * (
            32.0 * e / 3.0 + 40.0 * A2 - 382.0 * A2 * e / 9.0
            + (511.0 + 53.0 * g) / (6.0 * r) * w - (2519.0 - 24.0 * g) / (27.0 * r) * we
        )
    )
    G3 = 3.0 * r / 16.0 * (
        16.0 * e / 3.0 + 6.0 * A2 - 907.0 * A2 * e / 18.0
        + (143.0 + 9.0 * g) / (6.0 * r) * w + (477.0 + 403.0 * g) / (27.0 * r) * we
        + g * (
            14.0 + 4.0 * e / 3.0 + 71.0 * A2 / 2.0 - 1489.0 * A2 * e / 18.0
            - (215.0 + 29.0 * g) / (6.0 * r) * w - 2.0 * (1174.0 + 169.0 * g) / (27.0 * r) * we
        )
    )
    G4 = 3.0 * r / 256.0 * (
        84.0 + 52.0 * e + 212.0 * A2 - 267.0 * A2 * e
        + 2.0 * (299.0 + 61.0 * g) / (3.0 * r) * w - (14854.0 + 225.0 * g) / (27.0 * r) * we
        + g * (
            32.0 * e + 156.0 * A2 + 649.0 * A2 * e
            - (562.0 + 8.0 * g) / (3.0 * r) * w + (13285.0 + 5169.0 * g) / (27.0 * r) * we
        )
    )
    G1p = -we / r
    G2p = 9.0 / 16.0 * (
        8.0 * e / 3.0 + 203.0 * A2 / 6.0 - 625.0 * A2 * e / 54.0
        - (105.0 + 15.0 * g) / (18.0 * r) * w - (307.0 - 114.0 * g) / (81.0 * r) * we
        - g * (
            2.0 - 4.0 * e / 9.0 - 55.0 * A2 / 2.0 - 797.0 * A2 * e / 54.0
            + (197.0 + 23.0 * g) / (18.0 * r) * w - (211.0 - 32.0 * g) / (81.0 * r) * we
        )
    )
    G3p = 3.0 * r / 8.0 * (
        14.0 - 16.0 * e / 3.0 + 65.0 * A2 / 6.0 - 1439.0 * A2 * e / 18.0
        + 115.0 * (1.0 + g) / (18.0 * r) * w - (941.0 - 118.0 * g) / (27.0 * r) * we
        + g * (
            32.0 * e / 3.0 - 40.0 * A2 - 310.0 * A2 * e / 9.0
            + (511.0 + 53.0 * g) / (6.0 * r) * w - (251.0 - 24.0 * g) / (27.0 * r) * we
        )
    )
    G4p = -9.0 / 128.0 * (
        12.0 * e - 287.0 * A2 + 847.0 * A2 * e / 9.0
        - 2.0 * (28.0 + g) / r * w - 4.0 * (2210.0 - 69.0 * g) / (27.0 * r) * we
        - g * (
            96.0 + 152.0 * e / 3.0 + 135.0 * A2 - 2320.0 * A2 * e / 9.0
            + (497.0 - 123.0 * g) / (3.0 * r) * w - 4.0 * (17697.0 + 32.0 * g) / (27.0 * r) * we
        )
    )
    G1pp = -we / 6.0
    G2pp = 9.0 * r / 32.0 * (
        2.0 - 8.0 * e / 3.0 + 23.0 * A2 / 3.0 - 44.0 * A2 * e
        - (37.0 + g) / (18.0 * r) * w - (123.0 + 349.0 * g) / (3.0 * r) * we
        + g * (
            4.0 * e + 88.0 * A2 / 27.0
            + (421.0 + 45.0 * g) / (18.0 * r) * w - (1558.0 - 126.0 * g) / (81.0 * r) * we
        )
    )
    G3pp = -9.0 / 16.0 * (
        8.0 * e / 9.0 + 203.0 * A2 / 6.0 - 589.0 * A2 * e / 54.0
        - 5.0 * (51.0 + 2.0 * g) / (18.0 * r) * w - (349.0 - 282.0 * g) / (81.0 * r) * we
        + g * (
            2.0 - 4.0 * e / 9.0 - 26.0 * A2 - 412.0 * A2 * e / 27.0
            + (197.0 + 23.0 * g) / (18.0 * r) * w - (211.0 - 32.0 * g) / (81.0 * r) * we
        )
    )
    G4pp = -9.0 * r / 256.0 * (
        12.0 + 20.0 * e / 3.0 + 76.0 * A2 - 350.0 * A2 * e / 3.0
        + 32.0 * g / (3.0 * r) * w - 2.0 * (1529.0 + 450.0 * g) / (27.0 * r) * we
        + g * (
            8.0 * e - 749.0 * A2 / 3.0 + 808.0 * A2 * e / 9.0
            - (109.0 - 40.0 * g) / (3.0 * r) * w + (35.0 - 1269.0 * g) / (27.0 * r) * we
        )
    )

    F = CoefficientTable(F1, F2, F3, F4, F1p, F2p, F3p, F4p, F1pp, F2pp, F3pp, F4pp)
    G = CoefficientTable(G1, G2, G3, G4, G1p, G2p, G3p, G4p, G1pp, G2pp, G3pp, G4pp)
    return FGTables(F, G)


# closed forms -----------------------------------------------------------


def printed_denominators(f):
    """Denominators of ``r1 .. r10`` as printed, keyed by a readable label."""
    w1, w2 = f.omega1, f.omega2
    return {
        "omega1^2 omega2^2": w1 * w1 * w2 * w2,
        "3 omega1^2 (4 omega1^2 - omega2^2)": 3.0 * w1 * w1 * (4.0 * w1 * w1 - w2 * w2),
        "3 omega2^2 (4 omega2^2 - omega1^2)": 3.0 * w2 * w2 * (4.0 * w2 * w2 - w1 * w1),
        "omega1 omega2 (2 omega1 + omega2)(4 omega1 + 2 omega2)": w1 * w2 * (2 * w1 + w2) * (4 * w1 + 2 * w2),
        "omega1 omega2 (2 omega1 - omega2)(4 omega1 - 2 omega2)": w1 * w2 * (2 * w1 - w2) * (4 * w1 - 2 * w2),
        "omega1 omega2 (2 omega1 + omega2)(omega1 + 2 omega2)": w1 * w2 * (2 * w1 + w2) * (w1 + 2 * w2),
        "omega1 omega2 (2 omega1 - omega2)(2 omega2 - omega1)": w1 * w2 * (2 * w1 - w2) * (2 * w2 - w1),
    }


def r_coefficients(f, J, t, tol_div=ps.TOL_DIV):
    """The ten printed closed forms evaluated with table ``t``.

    Passing the ``F`` table gives ``r1 .. r10``; passing the ``G`` table
    gives ``s1 .. s10``.

    Raises
    ------
    SmallDivisorError
        When a printed denominator is below ``tol_div`` in magnitude.
    """
    dens = printed_denominators(f)
    small = sorted(label for label, v in dens.items() if abs(v) < tol_div)
    if small:
        raise SmallDivisorError(f"vanishing denominator(s): {', '.join(small)}", keys=small)
    d00, d20, d02, d5, d6, d9, d10 = dens.values()

    w1, w2 = f.omega1, f.omega2
    J13, J14, J21, J22, J23, J24 = J.J13, J.J14, J.J21, J.J22, J.J23, J.J24
    sq = math.sqrt(w1 * w2)
    r12 = math.sqrt(w1 / w2)
    r21 = math.sqrt(w2 / w1)
    F1, F2, F3, F4 = t.c1, t.c2, t.c3, t.c4
    F1p, F2p, F3p, F4p = t.c1p, t.c2p, t.c3p, t.c4p
    F1pp, F2pp, F3pp, F4pp = t.c1pp, t.c2pp, t.c3pp, t.c4pp

    m1 = J21 * J21 / w1 - J23 * J23 * w1
    m2 = J22 * J22 / w2 - J24 * J24 * w2
    # cross-mode combinations that recur in r5, r6, r9, r10
    a = J13 * J22 * r12 - J14 * J21 * r21
    b_minus = J21 * J24 * r21 - J22 * J23 * r12
    b_plus = J21 * J24 * r21 + J22 * J23 * r12
    mix = J13 * J24 + J14 * J23
    c_plus = J21 * J22 / sq + J23 * J24 * sq
    c_minus = J21 * J22 / sq - J23 * J24 * sq
    sp, sm = w1 + w2, w1 - w2

    r1 = (J13 * J13 * w1 * F4 + J13 * J23 * w1 * F4p + (J21 * J21 / w1 + J23 * J23 * w1) * F4pp) / d00
    r2 = (J14 * J14 * w2 * F4 + J14 * J24 * w2 * F4p + (J22 * J22 / w2 + J24 * J24 * w2) * F4pp) / d00
    r3 = -(
        8.0 * w1 ** 3 * J21 * (J13 * F1p + 2.0 * J23 * F1pp)
        + 4.0 * w1 ** 2 * ((J13 * F2 + J23 * F2pp) * J13 * w1 - m1 * F1pp)
        - 2.0 * w1 * J21 * (J13 * F3p + 2.0 * J23 * F3pp)
        - w1 * J13 * (J13 * F4 + J23 * F4pp) * w1
        + m1 * F1pp
    ) / d20
    r4 = (
        8.0 * w2 ** 3 * J22 * (J14 * F1p + 2.0 * J24 * F1pp)
        - 4.0 * w2 ** 2 * ((J14 * F2 + J24 * F2pp) * J14 * w2 - m2 * F2pp)
        - 2.0 * w2 * J22 * (J14 * F3p + 2.0 * J24 * F3pp)
        - w2 * J14 * (J14 * F4 + J24 * F4pp) * w2
        - m2 * F4pp
    ) / d02
    r5 = (
        sp ** 3 * (a * F1p - 2.0 * b_minus * F1pp)
        - sp ** 2 * (2.0 * (J13 * J14 * F2 + mix * F2p) * sq + c_plus * F2pp)
        - sp * (a * F3p - 2.0 * b_minus * F3pp)
        + (2.0 * (J13 * J14 * F4 + mix * F4p) * sq + 2.0 * c_plus * F4pp)
    ) / d5
    r6 = -(
        sm ** 3 * (a * F1p + 2.0 * b_plus * F1pp)
        + sm ** 2 * (2.0 * (J13 * J14 * F2 + mix * F2p) * sq - 2.0 * c_minus * F2pp)
        - sm * (a * F3p + 2.0 * (J21 * J22 * r21 + J22 * J23 * r12) * F3pp)
        - (2.0 * (J13 * J14 * F4 + mix * F4p) * sq - 2.0 * c_minus * F4pp)
    ) / d6
    r7 = (
        8.0 * w1 ** 3 * (J13 * (J13 * F1 + J23 * F1p) * w1 - m1 * F1pp)
        - 2.0 * w1 * (w1 * J13 * (J13 * F3 + J23 * F3p) - m1 * F3pp)
        - 4.0 * w1 ** 2 * J21 * (J13 * F2 + J23 * F2pp) * w1
        + J21 * (J13 * F4p + 2.0 * J23 * F4pp)
    ) / d20
    r8 = -(
        8.0 * w2 ** 3 * (J14 * (J14 * F1 + J24 * F1p) * w2 - m2 * F1pp)
        + 4.0 * w2 ** 2 * J22 * (J14 * F2 + 2.0 * J24 * F2pp) * w2
        - 2.0 * w2 * (w2 * J14 * (J14 * F3 + J24 * F3p) - m2 * F3pp)
        - J22 * (J14 * F4p + 2.0 * J24 * F4pp)
    ) / d02
    r9 = (
        sp ** 3 * ((2.0 * J13 * J14 * F1 + mix * F1p) * sq + 2.0 * c_plus * F1pp)
        - sp ** 2 * (a * F2p - 2.0 * b_minus * F2pp)
        - sp * ((2.0 * J13 * J14 * F3 + mix * F3p) * sq + 2.0 * c_plus * F3pp)
        - (a * F4p - 2.0 * b_minus * F4pp)
    ) / d9
    r10 = (
        sm ** 3 * ((2.0 * J13 * J14 * F1 + mix * F1p) * sq - 2.0 * c_minus * F1pp)
        - sm ** 2 * (a * F2p + 2.0 * b_plus * F2pp)
        - sm * ((2.0 * J13 * J14 * F3 + mix * F3p) * sq - 2.0 * c_minus * F3pp)
        + (a * F4p + 2.0 * b_minus * F4pp)
    ) / d10
    return (r1, r2, r3, r4, r5, r6, r7, r8, r9, r10)


def rs_coefficients(p, f=None, J=None, tables=None):
    """``r`` from the ``F`` table and ``s`` from the ``G`` table, same formulas."""
    d = derive(p)
    f = f if f is not None else frequencies(d)
    J = J if J is not None else whittaker_matrix(d, f)
    tables = tables if tables is not None else fg_tables(d)
    return RSCoefficients(r_coefficients(f, J, tables.F), r_coefficients(f, J, tables.G))


def series_from_rs(values):
    """``sum values[i] * term_i`` over the ten degree-2 harmonics."""
    return DAlembertSeries(zip(RS_KEYS, values))


def rs_from_series(s):
    return tuple(s.get(k) for k in RS_KEYS)


def b2_closed_form(rs):
    """``(B2_10, B2_01)`` from the closed-form coefficients; ``B2_01 = -sum s_i term_i``."""
    return series_from_rs(rs.r), ps.neg(series_from_rs(rs.s))


# series routes ----------------------------------------------------------


def first_order_series(f, J):
    """``(B1_10, B1_01)`` of the first-order orbit."""
    w1, w2 = f.omega1, f.omega2
    x = DAlembertSeries(
        {
            (1, 0, 1, 0, COS): J.J13 * math.sqrt(2.0 * w1),
            (1, 1, 0, 1, COS): J.J14 * math.sqrt(2.0 * w2),
        }
    )
    y = DAlembertSeries(
        {
            (1, 0, 1, 0, SIN): J.J21 * math.sqrt(2.0 / w1),
            (1, 1, 0, 1, SIN): J.J22 * math.sqrt(2.0 / w2),
            (1, 0, 1, 0, COS): J.J23 * math.sqrt(2.0 * w1),
            (1, 1, 0, 1, COS): J.J24 * math.sqrt(2.0 * w2),
        }
    )
    return x, y


def substitute(poly, x, y, vx, vy, max_degree=ps.DEFAULT_MAX_DEGREE):
    """Evaluate a :class:`~lpnorm.expansion.Poly` on four series."""
    args = (x, y, vx, vy)
    powers = [{0: ps.power(a, 0)} for a in args]

    def pw(i, k):
        cache = powers[i]
        if k not in cache:
            cache[k] = ps.mul(pw(i, k - 1), args[i], max_degree)
        return cache[k]

    total = DAlembertSeries()
    for expo, c in sorted(poly.terms.items()):
        term = ps.scale(pw(0, 0), c)
        for i, k in enumerate(expo):
            if k:
                term = ps.mul(term, pw(i, k), max_degree)
        total = total + term
    return total


def _l3(d, cubic, l3):
    if l3 is not None:
        return l3
    return (cubic if cubic is not None else cubic_coeffs(d)).l3_polynomial()


def _phi_psi(X2, Y2, q, n, f):
    D = ps.apply_D
    D2 = ps.apply_D2
    phi = D2(X2, f) + ps.scale(X2, 2.0 * q.F - n * n) + ps.scale(D(Y2, f), 2.0 * n) - ps.scale(Y2, q.G)
    psi = ps.scale(D(X2, f), 2.0 * n) + ps.scale(X2, q.G) - D2(Y2, f) - ps.scale(Y2, 2.0 * q.E - n * n)
    return phi, psi


def _critical_relative(*series):
    worst = 0.0
    for s in series:
        total = ps.norm(s)
        if total > 0.0:
            worst = max(worst, ps.norm(ps.critical_part(s)) / total)
    return worst


def _solve(phi, psi, f, B1, tol_crit):
    rel = _critical_relative(phi, psi)
    if rel > tol_crit:
        keys = sorted(set(ps.critical_part(phi).keys()) | set(ps.critical_part(psi).keys()))
        raise CriticalTermError(f"critical harmonics at relative size {rel:.3e}", keys=keys)
    B2 = (ps.invert_delta(phi, f), ps.neg(ps.invert_delta(psi, f)))
    return SecondOrderSolution(B1, B2, phi, psi, rel)


def generic_second_order_solve(p, f=None, J=None, cubic=None, quadratic=None, l3=None, tol_crit=TOL_CRIT):
    """``B2`` from the cubic Lagrangian through the series engine.

    ``X2 = dL3/dx`` and ``Y2 = dL3/dy`` at fixed velocities are evaluated on
    the first-order orbit with velocities replaced by ``D B1``.

    Parameters
    ----------
    cubic : CubicCoeffs, optional
        Defaults to the closed forms of :func:`lpnorm.expansion.cubic_coeffs`.
    l3 : Poly, optional
        Cubic Lagrangian used instead of ``cubic``, e.g.
        :func:`lpnorm.expansion.exact_l3_polynomial`.
    quadratic : QuadraticCoeffs, optional
        ``E, F, G`` used in ``Phi2``, ``Psi2`` and the frequencies.

    Raises
    ------
    CriticalTermError
        If ``Phi2`` or ``Psi2`` carries critical harmonics above ``tol_crit``
        relative to its largest harmonic.
    SmallDivisorError
        Propagated from the inversion.
    """
    d = derive(p)
    q = quadratic if quadratic is not None else quadratic_coeffs(d)
    f = f if f is not None else frequencies(d, q)
    J = J if J is not None else whittaker_matrix(d, f)
    L3 = _l3(d, cubic, l3)
    bx, by = first_order_series(f, J)
    vx, vy = ps.apply_D(bx, f), ps.apply_D(by, f)
    X2 = substitute(L3.diff(0), bx, by, vx, vy, max_degree=2)
    Y2 = substitute(L3.diff(1), bx, by, vx, vy, max_degree=2)
    phi, psi = _phi_psi(X2, Y2, q, d.n, f)
    return _solve(phi, psi, f, (bx, by), tol_crit)


def _table_side(table, bx, by, f):
    xx = ps.mul(bx, bx)
    xy = ps.mul(bx, by)
    yy = ps.mul(by, by)
    total = DAlembertSeries()
    for k in (1, 2, 3, 4):
        cx, cxy, cy = table.quadratic(k)
        Qk = ps.scale(xx, cx) + ps.scale(xy, cxy) + ps.scale(yy, cy)
        for _ in range(4 - k):
            Qk = ps.apply_D(Qk, f)
        total = total + Qk
    return total


def table_second_order_solve(p, f=None, J=None, tables=None, tol_crit=TOL_CRIT):
    """``B2`` from the printed ``F``/``G`` tables through the series engine."""
    d = derive(p)
    f = f if f is not None else frequencies(d)
    J = J if J is not None else whittaker_matrix(d, f)
    tables = tables if tables is not None else fg_tables(d)
    bx, by = first_order_series(f, J)
    phi = _table_side(tables.F, bx, by, f)
    psi = _table_side(tables.G, bx, by, f)
    return _solve(phi, psi, f, (bx, by), tol_crit)


def h3_coefficients(p, f, B1, B2=None, cubic=None, l3=None):
    """Angle averages of ``H3 = -L3`` on ``x = B1 + B2``.

    Only the degree-3 part is kept, so ``B2`` enters through products of
    degree four and higher and drops out; passing ``B2=None`` is the
    ablation.
    """
    L3 = _l3(derive(p), cubic, l3)
    x, y = B1
    if B2 is not None:
        x, y = x + B2[0], y + B2[1]
    vx, vy = ps.apply_D(x, f), ps.apply_D(y, f)
    h3 = ps.neg(substitute(L3, x, y, vx, vy, max_degree=3)).degree_part(3)
    # parity forbids constant harmonics at odd degree, so these sums are empty
    A = [0.0] * 4
    for (_, m, _, _, _), c in ps.average(h3).items():
        A[m] += c
    ref = ps.norm(h3)
    worst = max(abs(v) for v in A)
    return H3Coefficients(*A, reference=ref, relative=worst / ref if ref > 0.0 else 0.0)


# reporting --------------------------------------------------------------


def _relative(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0.0 else 0.0


def discrepancy_report(p, f=None, J=None, tol=TOL_ROUTE, oracle=True):
    """Coefficientwise comparison of the closed, tables and generic routes.

    With ``oracle=True`` a fourth column runs the generic route on the exact
    cubic Lagrangian from :func:`lpnorm.expansion.numeric_taylor_oracle`.

    Returns
    -------
    list of dict
        One entry per ``r_i`` and ``s_i`` with the route values, the
        closed-vs-generic and tables-vs-generic relative differences and a
        ``consistent`` flag (closed-vs-generic within ``tol``).
    """
    d = derive(p)
    f = f if f is not None else frequencies(d)
    J = J if J is not None else whittaker_matrix(d, f)
    rs = rs_coefficients(d, f, J)
    gen = generic_second_order_solve(d, f, J)
    tab = table_second_order_solve(d, f, J)
    closed = {"r": rs.r, "s": rs.s}
    generic = rs_of_solution(gen)
    tables = rs_of_solution(tab)
    exact = None
    if oracle:
        l3 = exact_l3_polynomial(numeric_taylor_oracle(d))
        exact = rs_of_solution(generic_second_order_solve(d, f, J, l3=l3))
    out = []
    for label in ("r", "s"):
        for i in range(10):
            c, g, t = closed[label][i], generic[label][i], tables[label][i]
            rel = _relative(c, g)
            entry = {
                "name": f"{label}{i + 1}",
                "key": list(RS_KEYS[i]),
                "closed": c,
                "tables": t,
                "generic": g,
                "rel_closed_generic": rel,
                "rel_tables_generic": _relative(t, g),
                "consistent": rel <= tol,
            }
            if exact is not None:
                entry["oracle"] = exact[label][i]
                entry["rel_closed_oracle"] = _relative(c, exact[label][i])
            out.append(entry)
    return out


def rs_of_solution(solution):
    """``{"r": ..., "s": ...}`` read off a series solution (``s`` undoes the outer minus)."""
    return {
        "r": rs_from_series(solution.B2[0]),
        "s": tuple(-v for v in rs_from_series(solution.B2[1])),
    }


def table_values(tables):
    """Flat tuple ``F1..F4pp, G1..G4pp``."""
    return astuple(tables.F) + astuple(tables.G)
