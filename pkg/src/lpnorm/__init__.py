"""Linear and Birkhoff normalization about the triangular points of the
photogravitational restricted three-body problem with Poynting-Robertson drag."""

from lpnorm.errors import (
    CriticalTermError,
    IntegrationError,
    LpnormError,
    NoConvergenceError,
    ParameterError,
    ResonanceError,
    SingularConfigurationError,
    SmallDivisorError,
    UnstableConfigurationError,
)
from lpnorm.params import DerivedParams, PerturbationParams, derive, perturbation_scale

__version__ = "0.1.0"

__all__ = [
    "CriticalTermError",
    "DerivedParams",
    "IntegrationError",
    "LpnormError",
    "NoConvergenceError",
    "ParameterError",
    "PerturbationParams",
    "ResonanceError",
    "SingularConfigurationError",
    "SmallDivisorError",
    "UnstableConfigurationError",
    "derive",
    "perturbation_scale",
]
