"""Taylor coefficients of the Lagrangian about L4.

Two sources are provided.  :func:`quadratic_coeffs` and :func:`cubic_coeffs`
evaluate the first-order closed forms in ``(epsilon, A2, nW1, gamma)``.
:func:`numeric_taylor_oracle` expands the exact Lagrangian about the refined
equilibrium with extended-precision finite differences and is the reference
the closed forms are checked against.

Sign convention for the cubic terms: the cubic part of the Lagrangian is
taken as ``+(x^3 T1 + 3 x^2 y T2 + 3 x y^2 T3 + y^3 T4)/6 + T5``, so that
``T1`` is the third ``x``-derivative of the position part.  This is the
convention under which the classical values of the closed forms agree with
the exact expansion.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from lpnorm.equilibria import shift_constants, triangular_point
from lpnorm.errors import ParameterError, SingularConfigurationError
from lpnorm.params import derive

SQRT3 = math.sqrt(3.0)

#: variable order of every monomial exponent tuple in this module
VARIABLES = ("x", "y", "vx", "vy")


class Poly:
    """Sparse real polynomial in ``(x, y, vx, vy)``.

    Stored as ``{(i, j, k, l): coeff}`` for ``x^i y^j vx^k vy^l``; immutable
    by convention.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {e: float(c) for e, c in (terms or {}).items() if c != 0.0}

    @classmethod
    def var(cls, index, coeff=1.0):
        e = [0, 0, 0, 0]
        e[index] = 1
        return cls({tuple(e): coeff})

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0): c})

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly({e: c * other for e, c in self.terms.items()})
        out = {}
        for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def diff(self, index):
        out = {}
        for e, c in self.terms.items():
            if e[index]:
                f = list(e)
                f[index] -= 1
                out[tuple(f)] = out.get(tuple(f), 0.0) + c * e[index]
        return Poly(out)

    def select(self, position_degree=None, velocity_degree=None):
        """Keep only monomials of the given position and velocity degrees."""
        return Poly(
            {
                e: c
                for e, c in self.terms.items()
                if (position_degree is None or e[0] + e[1] == position_degree)
                and (velocity_degree is None or e[2] + e[3] == velocity_degree)
            }
        )

    def __call__(self, x, y, vx=0.0, vy=0.0):
        z = (x, y, vx, vy)
        total = 0.0
        for e, c in self.terms.items():
            term = c
            for zi, ei in zip(z, e):
                if ei:
                    term = term * zi ** ei
            total = total + term
        return total

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        return f"Poly({self.terms!r})"


_X, _Y, _VX, _VY = (Poly.var(i) for i in range(4))


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of ``-E x^2 - F y^2 - G x y`` in the quadratic Lagrangian."""

    E: float
    F: float
    G: float


@dataclass(frozen=True)
class T5Functional:
    """Velocity-coupled drag term of the cubic Lagrangian, as printed.

    ``T5 = W1 / (2 s^3) [ (a vx + b vy) {3 (a x + b y) - (b x - a y)^2}
    - 2 (x vx + y vy)(a x + b y) s ]`` with ``s = a^2 + b^2``.
    """

    W1: float
    a: float
    b: float

    def polynomial(self):
        a, b = self.a, self.b
        s = a * a + b * b
        u = a * _X + b * _Y
        w = b * _X - a * _Y
        velocity = a * _VX + b * _VY
        radial = _X * _VX + _Y * _VY
        body = velocity * (3.0 * u - w * w) - 2.0 * s * radial * u
        return body * (self.W1 / (2.0 * s ** 3))

    def cubic_part(self):
        """Position-quadratic, velocity-linear monomials: the piece entering ``L3``."""
        return self.polynomial().select(position_degree=2, velocity_degree=1)

    def __call__(self, x, y, vx, vy):
        return self.polynomial()(x, y, vx, vy)


@dataclass(frozen=True)
class CubicCoeffs:
    T1: float
    T2: float
    T3: float
    T4: float
    T5: T5Functional

    def potential_polynomial(self):
        """``(x^3 T1 + 3 x^2 y T2 + 3 x y^2 T3 + y^3 T4) / 6``."""
        return (
            self.T1 * _X * _X * _X
            + 3.0 * self.T2 * _X * _X * _Y
            + 3.0 * self.T3 * _X * _Y * _Y
            + self.T4 * _Y * _Y * _Y
        ) * (1.0 / 6.0)

    def l3_polynomial(self):
        """Cubic Lagrangian: potential part plus the cubic part of ``T5``."""
        return self.potential_polynomial() + self.T5.cubic_part()


def quadratic_coeffs(p):
    """First-order closed forms for ``E``, ``F``, ``G``."""
    d = derive(p)
    eps, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    E = (1.0 / 16.0) * (
        2.0
        - 6.0 * eps
        - 3.0 * A2
        - 31.0 * A2 * eps / 2.0
        - (69.0 + g) / (6.0 * SQRT3) * w
        + 2.0 * (307.0 + 75.0 * g) * eps / (27.0 * SQRT3) * w
        + g
        * (
            2.0 * eps
            + 12.0 * A2
            + A2 * eps / 3.0
            + (199.0 + 17.0 * g) / (6.0 * SQRT3) * w
            - 2.0 * (226.0 + 99.0 * g) * eps / (27.0 * SQRT3) * w
        )
    )
    F = (-1.0 / 16.0) * (
        10.0
        - 2.0 * eps
        + 21.0 * A2
        - 717.0 * A2 * eps / 18.0
        - (67.0 + 19.0 * g) / (6.0 * SQRT3) * w
        + 2.0 * (413.0 - 3.0 * g) * eps / (27.0 * SQRT3) * w
        + g
        * (
            6.0 * eps
            - 293.0 * A2 * eps / 18.0
            + (187.0 + 27.0 * g) / (6.0 * SQRT3) * w
            - 4.0 * (247.0 + 3.0 * g) * eps / (27.0 * SQRT3) * w
        )
    )
    G = (SQRT3 / 8.0) * (
        2.0 * eps
        + 6.0 * A2
        - 37.0 * A2 * eps / 2.0
        - (13.0 + g) / (2.0 * SQRT3) * w
        + 2.0 * (79.0 - 7.0 * g) * eps / (27.0 * SQRT3) * w
        - g
        * (
            6.0
            - eps / 3.0
            + 13.0 * A2
            - 33.0 * A2 * eps / 2.0
            + (11.0 - g) / (2.0 * SQRT3) * w
            - (186.0 - g) * eps / (9.0 * SQRT3) * w
        )
    )
    return QuadraticCoeffs(E, F, G)


def cubic_coeffs(p):
    """First-order closed forms for ``T1``-``T4`` and the ``T5`` functional."""
    d = derive(p)
    eps, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    r = SQRT3
    T1 = (3.0 / 16.0) * (
        16.0 / 3.0 * eps
        + 6.0 * A2
        - 979.0 / 18.0 * A2 * eps
        + (143.0 + 9.0 * g) / (6.0 * r) * w
        + (459.0 + 376.0 * g) / (27.0 * r) * w * eps
        + g
        * (
            14.0
            + 4.0 * eps / 3.0
            + 25.0 * A2
            - 1507.0 / 18.0 * A2 * eps
            - (215.0 + 29.0 * g) / (6.0 * r) * w
            - 2.0 * (1174.0 + 169.0 * g) / (27.0 * r) * w * eps
        )
    )
    T2 = (3.0 * r / 16.0) * (
        14.0
        - 16.0 / 3.0 * eps
        + A2 / 3.0
        - 367.0 / 18.0 * A2 * eps
        + 115.0 * (1.0 + g) / (18.0 * r) * w
        - (959.0 - 136.0 * g) / (27.0 * r) * w * eps
        + g
        * (
            32.0 * eps / 3.0
            + 40.0 * A2
            - 382.0 / 9.0 * A2 * eps
            + (511.0 + 53.0 * g) / (6.0 * r) * w
            - (2519.0 - 24.0 * g) / (27.0 * r) * w * eps
        )
    )
    T3 = (-9.0 / 16.0) * (
        8.0 / 3.0 * eps
        + 203.0 * A2 / 6.0
        - 625.0 / 54.0 * A2 * eps
        - (105.0 + 15.0 * g) / (18.0 * r) * w
        - (403.0 - 114.0 * g) / (81.0 * r) * w * eps
        + g
        * (
            2.0
            - 4.0 * eps / 9.0
            + 55.0 * A2 / 2.0
            - 797.0 / 54.0 * A2 * eps
            + (197.0 + 23.0 * g) / (18.0 * r) * w
            - (211.0 - 32.0 * g) / (81.0 * r) * w * eps
        )
    )
    T4 = (-9.0 * r / 16.0) * (
        2.0
        - 8.0 / 3.0 * eps
        + 23.0 * A2 / 3.0
        - 44.0 * A2 * eps
        - (37.0 + g) / (18.0 * r) * w
        - (219.0 + 253.0 * g) / (81.0 * r) * w * eps
        + g
        * (
            4.0 * eps
            + 88.0 / 27.0 * A2 * eps
            + (241.0 + 45.0 * g) / (18.0 * r) * w
            - (1558.0 - 126.0 * g) / (81.0 * r) * w * eps
        )
    )
    sc = shift_constants(d)
    return CubicCoeffs(T1, T2, T3, T4, T5Functional(d.W1, sc.a, sc.b))


@dataclass(frozen=True)
class H2Form:
    """Quadratic Hamiltonian ``(px^2+py^2)/2 + n(y px - x py) + E x^2 + F y^2 + G x y``."""

    E: float
    F: float
    G: float
    n: float
    mu: float = 0.0
    W1: float = 0.0

    def value(self, x, y, px, py):
        return (
            0.5 * (px * px + py * py)
            + self.n * (y * px - x * py)
            + self.E * x * x
            + self.F * y * y
            + self.G * x * y
        )

    def matrix(self):
        """Symmetric Hessian of ``H2`` in the order ``(x, y, px, py)``."""
        n = self.n
        return np.array(
            [
                [2.0 * self.E, self.G, 0.0, -n],
                [self.G, 2.0 * self.F, n, 0.0],
                [0.0, n, 1.0, 0.0],
                [-n, 0.0, 0.0, 1.0],
            ]
        )

    def system_matrix(self):
        """Linear vector field ``dz/dt = K z`` of Hamilton's equations."""
        omega = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
        return omega @ self.matrix()

    def momenta(self, x, y, vx, vy):
        """Canonical momenta at an absolute rotating-frame state, drag included."""
        r1sq = (x + self.mu) ** 2 + y * y
        px = vx - self.n * y + self.W1 * (x + self.mu) / (2.0 * r1sq)
        py = vy + self.n * x + self.W1 * y / (2.0 * r1sq)
        return px, py


def h2_form(p, coeffs=None):
    """Package ``E, F, G, n`` (closed forms unless ``coeffs`` is given) into an :class:`H2Form`."""
    d = derive(p)
    q = coeffs if coeffs is not None else quadratic_coeffs(d)
    return H2Form(q.E, q.F, q.G, d.n, d.mu, d.W1)


# --- numerical Taylor oracle -------------------------------------------------

# central difference weights of order 2 for derivative orders 0..3, unit step
_STENCILS = {
    0: {0: Fraction(1)},
    1: {1: Fraction(1, 2), -1: Fraction(-1, 2)},
    2: {1: Fraction(1), 0: Fraction(-2), -1: Fraction(1)},
    3: {2: Fraction(1, 2), 1: Fraction(-1), -1: Fraction(1), -2: Fraction(-1, 2)},
}


@dataclass(frozen=True)
class TaylorTable:
    """Monomial coefficients of the exact Lagrangian about ``center``.

    Attributes
    ----------
    coeffs : dict
        ``{(i, j, k, l): c}`` for ``x^i y^j vx^k vy^l`` with ``i+j+k+l <= order``.
    center : EquilibriumPoint
    error_estimate : float
        Largest ``|D(h/2) - D(h)|/3`` before extrapolation, a bound on the
        discarded second-order truncation.
    """

    coeffs: dict
    center: object
    n: float
    order: int
    step: float
    error_estimate: float

    def coeff(self, i, j, k=0, l=0):
        return self.coeffs.get((i, j, k, l), 0.0)

    def quadratic(self):
        """``E, F, G`` read off the position-quadratic coefficients."""
        half = self.n * self.n / 2.0
        return QuadraticCoeffs(half - self.coeff(2, 0), half - self.coeff(0, 2), -self.coeff(1, 1))

    def cubic(self):
        """``(T1, T2, T3, T4)`` read off the position-cubic coefficients."""
        if self.order < 3:
            raise ParameterError("cubic coefficients need an order-3 table")
        return (6.0 * self.coeff(3, 0), 2.0 * self.coeff(2, 1), 2.0 * self.coeff(1, 2), 6.0 * self.coeff(0, 3))

    def velocity_cubic(self):
        """Position-quadratic, velocity-linear part as a :class:`Poly`."""
        return Poly({e: c for e, c in self.coeffs.items() if e[0] + e[1] == 2 and e[2] + e[3] == 1})


def exact_lagrangian(p, center, dps=40):
    """Exact Lagrangian as an mpmath function of displacements from ``center``."""
    d = derive(p)
    with mpmath.workdps(dps):
        mu = mpmath.mpf(d.mu)
        q1 = mpmath.mpf(1) - mpmath.mpf(d.epsilon)
        A2 = mpmath.mpf(d.A2)
        W1 = mpmath.mpf(d.W1)
        n = mpmath.sqrt(1 + mpmath.mpf(3) / 2 * A2)
        x0 = mpmath.mpf(center.x)
        y0 = mpmath.mpf(center.y)

    def lagrangian(x, y, vx, vy):
        X = x0 + x
        Y = y0 + y
        r1sq = (X + mu) ** 2 + Y * Y
        r2sq = (X + mu - 1) ** 2 + Y * Y
        r1 = mpmath.sqrt(r1sq)
        r2 = mpmath.sqrt(r2sq)
        return (
            (vx * vx + vy * vy) / 2
            + n * (X * vy - vx * Y)
            + n * n * (X * X + Y * Y) / 2
            + (1 - mu) * q1 / r1
            + mu / r2
            + mu * A2 / (2 * r2 * r2sq)
            + W1 * (((X + mu) * vx + Y * vy) / (2 * r1sq) - n * mpmath.atan2(Y, X + mu))
        )

    return lagrangian, float(n)


def _multi_indices(order):
    for total in range(order + 1):
        for e in itertools.product(range(total + 1), repeat=4):
            if sum(e) == total:
                yield e


def _derivatives(func, order, h, dps):
    cache = {}

    def at(offsets):
        if offsets not in cache:
            with mpmath.workdps(dps):
                cache[offsets] = func(*(k * h for k in offsets))
        return cache[offsets]

    out = {}
    with mpmath.workdps(dps):
        for e in _multi_indices(order):
            total = mpmath.mpf(0)
            for combo in itertools.product(*(_STENCILS[k].items() for k in e)):
                weight = Fraction(1)
                for _, w in combo:
                    weight *= w
                total += mpmath.mpf(weight.numerator) / weight.denominator * at(tuple(o for o, _ in combo))
            out[e] = total / h ** sum(e)
    return out


def numeric_taylor_oracle(p, order=3, step=1e-3, center=None, dps=40):
    """Expand the exact Lagrangian about the refined L4 point.

    Derivatives come from tensor-product central differences of second
    order at steps ``h`` and ``h/2`` combined by Richardson extrapolation,
    evaluated in ``dps``-digit arithmetic so that rounding is negligible.

    Parameters
    ----------
    p : PerturbationParams or DerivedParams
    order : {2, 3}
        Highest total degree in ``(x, y, vx, vy)``.
    step : float
        Base finite-difference step ``h``.
    center : EquilibriumPoint, optional
        Expansion point; defaults to the refined L4 point.

    Raises
    ------
    SingularConfigurationError
        If the stencil reaches within ten steps of a primary.
    """
    if order not in (2, 3):
        raise ParameterError(f"order must be 2 or 3, got {order!r}")
    if not 0.0 < step < 0.05:
        raise ParameterError(f"step must lie in (0, 0.05), got {step!r}")
    d = derive(p)
    if center is None:
        center = triangular_point(d, "L4")
    r1 = math.hypot(center.x + d.mu, center.y)
    r2 = math.hypot(center.x + d.mu - 1.0, center.y)
    if min(r1, r2) < 10.0 * 2.0 * step:
        raise SingularConfigurationError("finite-difference stencil is too close to a primary")

    func, n = exact_lagrangian(d, center, dps)
    with mpmath.workdps(dps):
        h = mpmath.mpf(step)
        coarse = _derivatives(func, order, h, dps)
        fine = _derivatives(func, order, h / 2, dps)
        coeffs = {}
        worst = 0.0
        for e in coarse:
            extrapolated = (4 * fine[e] - coarse[e]) / 3
            factorial = math.prod(math.factorial(k) for k in e)
            coeffs[e] = float(extrapolated / factorial)
            worst = max(worst, float(abs(fine[e] - coarse[e]) / 3 / factorial))
    return TaylorTable(coeffs, center, n, order, step, worst)


def exact_l3_polynomial(table):
    """Cubic Lagrangian read off an order-3 :class:`TaylorTable`.

    Keeps the position-cubic monomials and the position-quadratic,
    velocity-linear ones, the same monomial set as
    :meth:`CubicCoeffs.l3_polynomial`.
    """
    if table.order < 3:
        raise ParameterError("the cubic Lagrangian needs an order-3 table")
    keep = {}
    for e, c in table.coeffs.items():
        pos, vel = e[0] + e[1], e[2] + e[3]
        if (pos, vel) in ((3, 0), (2, 1)):
            keep[e] = c
    return Poly(keep)
