"""Exception types shared across the package.

The CLI maps these onto process exit codes; library code raises them
directly so callers can distinguish bad input from solver trouble.
"""


class ConfigError(ValueError):
    """Invalid user-supplied configuration (bad value, unknown key, missing field)."""


class SolverError(RuntimeError):
    """A solver failed to produce a result (step-size collapse, no convergence)."""


class InvariantViolation(RuntimeError):
    """A physical invariant (trace, positivity, Hermiticity) left its tolerance band."""


class SingularSpectrumError(ValueError):
    """A noise spectrum was evaluated at a frequency where it diverges."""


class ConvergenceError(RuntimeError):
    """A finite-difference or series evaluation failed its self-consistency check."""


class FitError(RuntimeError):
    """A model fit could not be performed on the supplied data."""
