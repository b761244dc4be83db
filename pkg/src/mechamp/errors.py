"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, solver failures
(StiffnessError, ConvergenceError, DegenerateSteadyStateError) -> 3,
invariant/truncation failures (TruncationError, InvariantError) -> 4.
"""


class MechampError(Exception):
    """Base class for all package errors."""


class ConfigError(MechampError):
    """Invalid or unparsable scenario configuration."""


class StiffnessError(MechampError):
    """Adaptive integrator step size underflowed."""


class ConvergenceError(MechampError):
    """A solver finished without meeting its residual tolerance."""


class DegenerateSteadyStateError(MechampError):
    """Steady-state equation is singular or has a non-unique solution."""


class TruncationError(MechampError):
    """Fock truncation is too small for the requested computation."""


class InvariantError(MechampError):
    """A physical invariant (trace, hermiticity, positivity, ...) failed."""
