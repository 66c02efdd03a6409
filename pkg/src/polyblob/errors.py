"""Exception types shared across the package."""


class PolyblobError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PolyblobError):
    """Invalid configuration values or malformed config input."""


class FeasibilityViolation(PolyblobError):
    """A finitely extensible configuration vector left its feasible ball."""


class DegenerateEnsemble(PolyblobError):
    """An ensemble is unusable for the requested operation (e.g. all
    particles coincide so the median pairwise distance is zero)."""


class SizeMismatch(PolyblobError):
    """Two containers that must have matching sizes do not."""


class OptimizerDivergence(PolyblobError):
    """The proximal optimizer hit its iteration cap without making any
    progress."""


class RejectionOverflow(PolyblobError):
    """Rejection resampling failed to produce a feasible point within the
    retry budget."""


class LinearSolveFailure(PolyblobError):
    """A sparse linear solve produced NaNs or failed to factorize."""


class DegenerateLoop(PolyblobError):
    """A trajectory passed to the hysteresis-loop analysis never closes."""
