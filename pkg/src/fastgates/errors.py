"""Exception hierarchy shared by all fastgates modules."""


class FastGatesError(Exception):
    """Base class for all numerical/model errors raised by fastgates."""


class Unstable(FastGatesError):
    """The (a, q) point lies outside the first Mathieu stability region."""


class TruncationInsufficient(FastGatesError):
    """Floquet coefficient truncation order J is too low for this (a, q)."""


class SingularDenominator(FastGatesError):
    """The micromotion enhancement factor is undefined (near instability)."""


class NoConvergence(FastGatesError):
    """An iterative solver hit its iteration cap without converging."""


class ResonantCrystal(FastGatesError):
    """Periodic-crystal iteration oscillates without decaying."""


class QuadratureFailure(FastGatesError):
    """Numerical quadrature of a Hill coefficient did not converge."""


class InvalidTiming(FastGatesError):
    """Pulse-group times must be strictly positive."""


class GroupOverlap(FastGatesError):
    """Expanded pulse groups collide; repetition rate too low."""


class StepFailure(FastGatesError):
    """ODE integrator broke down."""


class EscapedIon(FastGatesError):
    """Ion displacement exceeded the linearization sanity bound."""


class ConfigError(FastGatesError):
    """Run configuration is missing fields or internally inconsistent."""
