"""Exception and warning types shared across the package."""


class JacobiError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(JacobiError, ValueError):
    """Inputs outside the admissible parameter set."""


class DomainError(JacobiError, ValueError):
    """A point outside the open interval (0, d) where one is required."""


class PoleError(ParameterError):
    """Gamma function evaluated at a nonpositive integer."""


class NonConvergence(JacobiError, ArithmeticError):
    """A series or iteration hit its cap without meeting its tolerance."""


class DivergenceError(JacobiError, ArithmeticError):
    """Adaptive quadrature detected a non-integrable endpoint."""


class GuardError(ParameterError):
    """The eigenvalue lies below the lower bound a formula needs."""


class RegimeError(ParameterError):
    """The requested quantity is not defined for this boundary regime."""


class TruncationWarning(UserWarning):
    """A spectral series was cut before its tail dropped below tolerance."""


class CensoringWarning(UserWarning):
    """Monte Carlo horizon leaves non-negligible unresolved probability."""


class ConfigError(ParameterError):
    """Invalid simulation grid, path count or seed."""
