"""Exception types shared across the package."""


class TwistringError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TwistringError):
    """Invalid configuration file or parameter set."""


class NumericsError(TwistringError):
    """A numerical procedure failed (blow-up, no convergence, ...)."""


class BlowupError(NumericsError):
    """An integrated quantity left the admissible range."""


class OperatorUndefinedError(NumericsError):
    """The periodic solution operator is undefined: |b| <= |sin(theta/2)|.

    Carries the feasibility margin so callers can distinguish a grazing
    boundary from a deep violation.
    """

    def __init__(self, margin: float, message: str | None = None):
        self.margin = margin
        super().__init__(message or f"operator undefined: |b| <= |sin(theta/2)| (margin={margin:.3e})")


class ConvergenceError(NumericsError):
    """An iterative solver did not reach its tolerance."""


class HopfLocationError(NumericsError):
    """Hopf point root-finding failed (no sign change, index switch, degeneracy)."""


class DegenerateModeError(HopfLocationError):
    """The critical eigenvalue is real: no oscillatory bifurcation."""
