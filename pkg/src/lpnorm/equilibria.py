"""Triangular equilibrium points.

Three constructors are provided: the first-order closed form in terms of
``delta = q1**(1/3)``, the polynomial form in the small quantities
``(epsilon, A2, nW1)``, and a Newton refinement of the rest-state force
balance that serves as the reference for both.
"""

import math
from dataclasses import dataclass

from lpnorm import _kernels
from lpnorm.errors import NoConvergenceError, ParameterError, SingularConfigurationError
from lpnorm.params import derive

SQRT3 = math.sqrt(3.0)

#: below this mass ratio the drag correction of the closed form is refused
MU_SINGULAR = 1e-6

BRANCHES = ("L4", "L5")


@dataclass(frozen=True)
class EquilibriumPoint:
    """A triangular point in the rotating frame.

    ``method`` records how the point was obtained: ``series`` (closed form in
    delta), ``epsilon_series`` (polynomial in the small quantities) or
    ``refined`` (Newton solve of the force balance).
    """

    x: float
    y: float
    branch: str
    method: str

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ParameterError(f"branch must be L4 or L5, got {self.branch!r}")
        if self.branch == "L4" and not self.y > 0.0:
            raise SingularConfigurationError(f"L4 point must have y > 0, got y={self.y!r}")
        if self.branch == "L5" and not self.y < 0.0:
            raise SingularConfigurationError(f"L5 point must have y < 0, got y={self.y!r}")


@dataclass(frozen=True)
class ShiftConstants:
    """Coordinates of L4 relative to the radiating primary: ``a = x* + mu``, ``b = y*``."""

    a: float
    b: float


def _check_branch(branch):
    if branch not in BRANCHES:
        raise ParameterError(f"branch must be L4 or L5, got {branch!r}")


def series_point(p, branch="L4"):
    """Closed-form first-order triangular point in terms of ``delta``.

    Parameters
    ----------
    p : PerturbationParams or DerivedParams
    branch : {"L4", "L5"}

    Raises
    ------
    SingularConfigurationError
        If the drag correction divides by a vanishing ``mu (1 - mu) y0``, or
        the radicand of the ordinate turns negative.
    """
    _check_branch(branch)
    d = derive(p)
    mu, A2, nW1, delta = d.mu, d.A2, d.nW1, d.delta
    if nW1 > 0.0 and mu < MU_SINGULAR:
        raise SingularConfigurationError(
            f"drag correction is singular for mu={mu!r} < {MU_SINGULAR} with W1 > 0"
        )
    dd = delta * delta
    half = dd / 2.0
    x0 = half - mu
    y0 = delta * math.sqrt(1.0 - dd / 4.0)
    if branch == "L5":
        y0 = -y0
    denom = 3.0 * mu * (1.0 - mu)
    if x0 == 0.0 or denom * y0 == 0.0:
        raise SingularConfigurationError("closed-form point is singular (x0 or mu(1-mu)y0 vanishes)")

    drag_x = nW1 * ((1.0 - mu) * (1.0 + 2.5 * A2) + mu * (1.0 - A2 / 2.0) * half)
    x = x0 * (1.0 - drag_x / (denom * y0 * x0) - half * A2 / x0)

    drag_y = nW1 * dd * (2.0 * mu - 1.0 - mu * (1.0 - 1.5 * A2) * half + 7.0 * (1.0 - mu) * A2 / 2.0)
    radicand = 1.0 - drag_y / (denom * y0 ** 3) - dd * (1.0 - half) * A2 / (y0 * y0)
    if radicand <= 0.0:
        raise SingularConfigurationError(f"ordinate radicand is non-positive ({radicand!r})")
    y = y0 * math.sqrt(radicand)
    return EquilibriumPoint(x, y, branch, "series")


def epsilon_form_point(p):
    """L4 as a polynomial in ``(epsilon, A2, nW1)`` about the classical point."""
    d = derive(p)
    eps, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    x = (
        g / 2.0
        - eps / 3.0
        - A2 / 2.0
        + A2 * eps / 3.0
        - (9.0 + g) / (6.0 * SQRT3) * w
        - 4.0 * g * eps / (27.0 * SQRT3) * w
    )
    y = SQRT3 / 2.0 * (
        1.0
        - 2.0 * eps / 9.0
        - A2 / 3.0
        - 2.0 * A2 * eps / 9.0
        + (1.0 + g) / (9.0 * SQRT3) * w
        - 4.0 * g * eps / (27.0 * SQRT3) * w
    )
    return EquilibriumPoint(x, y, "L4", "epsilon_series")


def shift_constants(p):
    """Offsets ``(a, b)`` of L4 from the radiating primary, polynomial form."""
    d = derive(p)
    eps, A2, w, g = d.epsilon, d.A2, d.nW1, d.gamma
    a = 0.5 * (
        1.0
        - 2.0 * eps / 3.0
        - A2
        + 2.0 * A2 * eps / 3.0
        - (9.0 + g) / (3.0 * SQRT3) * w
        - 8.0 * g * eps / (27.0 * SQRT3) * w
    )
    b = SQRT3 / 2.0 * (
        1.0
        - 2.0 * eps / 9.0
        - A2 / 3.0
        - 2.0 * A2 * eps / 9.0
        + (1.0 + g) / (9.0 * SQRT3) * w
        - 4.0 * g * eps / (27.0 * SQRT3) * w
    )
    return ShiftConstants(a, b)


def rest_force(x, y, p):
    """Force balance ``(U_x, U_y)`` at zero velocity, drag included."""
    d = derive(p)
    ux, uy, rmin = _kernels.accel_py(x, y, 0.0, 0.0, d.mu, d.q1, d.A2, d.W1, d.n)
    if rmin < _kernels.R_SINGULAR:
        raise SingularConfigurationError(f"point ({x!r}, {y!r}) coincides with a primary")
    return ux, uy


def refine_point(start, p, tol=1e-12, max_iter=50):
    """Newton solve of ``U_x = U_y = 0`` starting from ``start``.

    The Jacobian is built by central differences with step
    ``1e-7 * max(1, |coordinate|)``.

    Returns
    -------
    EquilibriumPoint
        With ``method="refined"`` and ``max(|U_x|, |U_y|) <= tol``.

    Raises
    ------
    NoConvergenceError
        After ``max_iter`` iterations, carrying the last residual.
    SingularConfigurationError
        If the finite-difference Jacobian is singular.
    """
    if not tol > 0.0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    x, y = float(start.x), float(start.y)
    fx, fy = rest_force(x, y, p)
    residual = max(abs(fx), abs(fy))
    for iteration in range(max_iter + 1):
        if residual <= tol:
            return EquilibriumPoint(x, y, start.branch, "refined")
        if iteration == max_iter:
            break
        hx = 1e-7 * max(1.0, abs(x))
        hy = 1e-7 * max(1.0, abs(y))
        fxp, fyp = rest_force(x + hx, y, p)
        fxm, fym = rest_force(x - hx, y, p)
        a11, a21 = (fxp - fxm) / (2 * hx), (fyp - fym) / (2 * hx)
        fxp, fyp = rest_force(x, y + hy, p)
        fxm, fym = rest_force(x, y - hy, p)
        a12, a22 = (fxp - fxm) / (2 * hy), (fyp - fym) / (2 * hy)
        det = a11 * a22 - a12 * a21
        scale = max(abs(a11 * a22), abs(a12 * a21), 1e-300)
        if abs(det) <= 1e-14 * scale:
            raise SingularConfigurationError(f"singular Jacobian at ({x!r}, {y!r})")
        dx = (a22 * fx - a12 * fy) / det
        dy = (a11 * fy - a21 * fx) / det
        x_new, y_new = x - dx, y - dy
        fx_new, fy_new = rest_force(x_new, y_new, p)
        res_new = max(abs(fx_new), abs(fy_new))
        if res_new >= residual and max(abs(dx), abs(dy)) <= 4e-16 * max(1.0, abs(x), abs(y)):
            # stuck at the rounding floor of the force evaluation
            break
        x, y, fx, fy, residual = x_new, y_new, fx_new, fy_new, res_new
    raise NoConvergenceError(
        f"Newton refinement did not reach tol={tol!r}", residual=residual, iterations=iteration
    )


def triangular_point(p, branch="L4", tol=1e-12):
    """Refined triangular point, started from the closed form."""
    return refine_point(series_point(p, branch), p, tol=tol)


def residuals(point, p):
    """Return ``(U_x, U_y)`` at ``point``."""
    return rest_force(point.x, point.y, p)
