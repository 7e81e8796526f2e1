"""Exception types raised by the solver stack."""


class ConfigurationError(ValueError):
    """Invalid orders, coefficients, grid sizes or node sets."""


class NumericalError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


class SolverError(RuntimeError):
    """The collocation system is singular or a solve failed its residual check."""
