"""Exception hierarchy shared by all eulerlab modules."""


class EulerLabError(Exception):
    """Base class for all eulerlab errors."""


class DomainError(EulerLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class QuadratureError(EulerLabError, RuntimeError):
    """A quadrature did not converge to the requested tolerance."""


class ConstructionError(EulerLabError, RuntimeError):
    """A solver-backed object (e.g. an MFS Green function) failed to build."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularJetError(EulerLabError, ZeroDivisionError):
    """Jet operation undefined (zero/negative constant term in div, log, sqrt)."""


class SizeError(EulerLabError, ValueError):
    """Combinatorial enumeration would exceed the configured guard."""


class StiffnessError(EulerLabError, RuntimeError):
    """ODE step size underflow; diagnostics attached."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConservationError(EulerLabError, RuntimeError):
    """A conserved quantity left its tolerance band (e.g. tracer exited the domain)."""


class SaturationError(EulerLabError, RuntimeError):
    """Osgood bound exceeded the modulus domain [0, a]."""


class FitError(EulerLabError, RuntimeError):
    """Degenerate data made a least-squares fit meaningless."""


class BlowUpError(EulerLabError, RuntimeError):
    """Taylor coefficients overflowed, typically near a vortex collision."""

    def __init__(self, message, last_valid_time=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time
