"""Exception hierarchy shared by every module."""


class LpnormError(Exception):
    """Base class for all library errors."""


class ParameterError(LpnormError, ValueError):
    """Input parameters violate their domain."""


class SingularConfigurationError(LpnormError):
    """A closed-form expression divides by (nearly) zero."""


class NoConvergenceError(LpnormError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IntegrationError(LpnormError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnstableConfigurationError(LpnormError):
    def __init__(self, message, roots=None):
        super().__init__(message)
        self.roots = roots


class ResonanceError(LpnormError):
    """Two frequencies (or a frequency and a lattice combination) coincide."""


class SmallDivisorError(ResonanceError):
    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class CriticalTermError(LpnormError):
    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)
