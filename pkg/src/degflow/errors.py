"""Exception hierarchy shared by all degflow modules."""


class DegflowError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DegflowError):
    """An input violates a mathematical domain requirement (sign, range, finiteness)."""


class InconclusiveError(DegflowError):
    """A numerical classification heuristic could not separate the cases."""


class SlowDecayError(DegflowError):
    """Operation requires a fast-decay mobility but got a slow-decay one."""


class ConvergenceError(DegflowError):
    """An iterative solver failed to reach its tolerance."""


class MassError(DegflowError):
    """A density profile does not carry the required total mass."""


class MonotonicityError(DegflowError):
    """A quantile vector is not strictly increasing."""


class ShapeError(DegflowError):
    """Mismatched resolutions or array shapes."""


class NonFiniteError(DegflowError):
    """A computed quantity overflowed or became NaN."""


class CflError(DegflowError):
    """The explicit time-step stability estimate degenerated."""


class BlowupError(DegflowError):
    """The finite-volume state became non-finite during time stepping."""


class TimeRangeError(DegflowError):
    """A requested time lies outside the available trajectory range."""


class ConfigError(DegflowError):
    """An experiment configuration violates the schema."""
