"""Problem parameters and the scalars derived from them.

All physical knobs live in :class:`PerturbationParams` (mass ratio, mass
reduction factor, oblateness, drag constant).  Everything downstream works on
:class:`DerivedParams`, which can also be built directly from the small
quantities ``(epsilon, A2, W1)`` when an oracle needs to move one of them
independently of the others.
"""

import math
from dataclasses import asdict, dataclass

from lpnorm.errors import ParameterError

#: mass reduction factor conversion constant, CGS units
GRAIN_Q_CONSTANT = 5.6e-5


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PerturbationParams:
    """Input knobs of the problem.

    Parameters
    ----------
    mu : float
        Mass ratio m2/(m1+m2), 0 < mu <= 1/2.
    q1 : float
        Mass reduction factor of the radiating primary, 0 < q1 <= 1.
    A2 : float
        Oblateness coefficient of the smaller primary, A2 >= 0.
    cd : float
        Dimensionless speed-of-light constant entering the drag, cd > 0.
    """

    mu: float
    q1: float = 1.0
    A2: float = 0.0
    cd: float = 1.0

    def __post_init__(self):
        mu = _finite("mu", self.mu)
        q1 = _finite("q1", self.q1)
        A2 = _finite("A2", self.A2)
        cd = _finite("cd", self.cd)
        if not 0.0 < mu <= 0.5:
            raise ParameterError(f"mu must satisfy 0 < mu <= 1/2, got {mu!r}")
        if not 0.0 < q1 <= 1.0:
            raise ParameterError(f"q1 must satisfy 0 < q1 <= 1, got {q1!r}")
        if A2 < 0.0:
            raise ParameterError(f"A2 must be non-negative, got {A2!r}")
        if cd <= 0.0:
            raise ParameterError(f"cd must be positive, got {cd!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "A2", A2)
        object.__setattr__(self, "cd", cd)

    @classmethod
    def from_small(cls, mu, epsilon=0.0, A2=0.0, W1=0.0):
        """Build parameters from the small quantities (epsilon, A2, W1).

        ``cd`` is chosen so that the drag coefficient equals ``W1``.  A
        non-zero ``W1`` needs a non-zero ``epsilon`` since the drag strength
        is proportional to ``1 - q1``.
        """
        epsilon = _finite("epsilon", epsilon)
        W1 = _finite("W1", W1)
        if W1 < 0.0 or epsilon < 0.0:
            raise ParameterError("epsilon and W1 must be non-negative")
        if (W1 > 0.0) != (epsilon > 0.0):
            # W1 = 0 iff q1 = 1; DerivedParams.from_values lifts this coupling
            raise ParameterError("W1 and epsilon must be zero together or positive together")
        cd = (1.0 - mu) * epsilon / W1 if W1 > 0.0 else 1.0
        return cls(mu=mu, q1=1.0 - epsilon, A2=A2, cd=cd)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in ("mu", "q1", "A2", "cd") if k in data})


@dataclass(frozen=True)
class DerivedParams:
    """Scalars consumed by the formulas: mass ratio plus the small quantities."""

    mu: float
    q1: float
    A2: float
    epsilon: float
    n: float
    gamma: float
    delta: float
    W1: float

    @classmethod
    def from_values(cls, mu, epsilon=0.0, A2=0.0, W1=0.0):
        """Build derived scalars directly, bypassing ``cd``.

        Used by oracles that perturb ``W1`` with ``epsilon`` held at zero.
        """
        mu = _finite("mu", mu)
        epsilon = _finite("epsilon", epsilon)
        A2 = _finite("A2", A2)
        W1 = _finite("W1", W1)
        if not 0.0 < mu <= 0.5:
            raise ParameterError(f"mu must satisfy 0 < mu <= 1/2, got {mu!r}")
        if not 0.0 <= epsilon < 1.0:
            raise ParameterError(f"epsilon must satisfy 0 <= epsilon < 1, got {epsilon!r}")
        if A2 < 0.0 or W1 < 0.0:
            raise ParameterError("A2 and W1 must be non-negative")
        q1 = 1.0 - epsilon
        return cls(
            mu=mu,
            q1=q1,
            A2=A2,
            epsilon=epsilon,
            n=math.sqrt(1.0 + 1.5 * A2),
            gamma=1.0 - 2.0 * mu,
            delta=q1 ** (1.0 / 3.0),
            W1=W1,
        )

    @property
    def nW1(self):
        return self.n * self.W1

    def to_dict(self):
        return asdict(self)


def derive(p):
    """Derive ``(epsilon, n, gamma, delta, W1)`` from the input knobs.

    Accepts a :class:`DerivedParams` too, in which case it is returned as is.
    """
    if isinstance(p, DerivedParams):
        return p
    if not isinstance(p, PerturbationParams):
        raise ParameterError(f"expected PerturbationParams, got {type(p).__name__}")
    epsilon = 1.0 - p.q1
    return DerivedParams(
        mu=p.mu,
        q1=p.q1,
        A2=p.A2,
        epsilon=epsilon,
        n=math.sqrt(1.0 + 1.5 * p.A2),
        gamma=1.0 - 2.0 * p.mu,
        delta=p.q1 ** (1.0 / 3.0),
        W1=(1.0 - p.mu) * epsilon / p.cd,
    )


def perturbation_scale(p, h):
    """Scale epsilon, A2 and W1 by ``h`` in [0, 1], keeping mu fixed.

    W1 is proportional to epsilon at fixed cd, so only q1 and A2 change.
    """
    h = float(h)
    if not 0.0 <= h <= 1.0:
        raise ParameterError(f"scale h must lie in [0, 1], got {h!r}")
    if isinstance(p, DerivedParams):
        return DerivedParams.from_values(p.mu, h * p.epsilon, h * p.A2, h * p.W1)
    return PerturbationParams(mu=p.mu, q1=1.0 - h * (1.0 - p.q1), A2=h * p.A2, cd=p.cd)


def perturbation_magnitude(p):
    """Largest small quantity, ``max(epsilon, A2, n*W1)``; gates series validity."""
    d = derive(p)
    return max(d.epsilon, d.A2, d.n * d.W1)


def q_from_grain(radius_cm, density_cgs, chi=1.0):
    """Mass reduction factor of a grain of radius ``radius_cm`` and density ``density_cgs``."""
    if radius_cm <= 0 or density_cgs <= 0:
        raise ParameterError("grain radius and density must be positive")
    return 1.0 - GRAIN_Q_CONSTANT * chi / (radius_cm * density_cgs)
