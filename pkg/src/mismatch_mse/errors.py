"""Exception hierarchy shared by all modules."""


class MismatchMseError(Exception):
    """Base class for all library errors."""


# --- solver failures -------------------------------------------------------

class SolverError(MismatchMseError):
    pass


class NoSignChange(SolverError):
    """Root bracket could not be established even after expansion."""


class NonFinite(SolverError):
    """Objective or residual returned NaN/inf."""


class MaxIters(SolverError):
    """Iteration budget exhausted before reaching tolerance."""


class SingularJacobian(SolverError):
    """Newton step undefined; finite-difference Jacobian is singular."""


# --- rate / chain evaluation ----------------------------------------------

class Gamma0NotBracketed(MismatchMseError):
    """The power-normalization constant has no root in the search bracket."""


class LogOfNonPositive(MismatchMseError):
    """A logarithm argument was <= 0 where positivity is guaranteed."""


class CrossCheckMismatch(MismatchMseError):
    """Two independent routes to the same quantity disagree beyond tolerance."""


class DegenerateGamma(MismatchMseError):
    """The codeword-population exponent is undefined at the requested energy."""


class DegenerateChain(MismatchMseError):
    """A denominator in the estimator-coefficient chain vanished."""


class GlassyRootNotBracketed(MismatchMseError):
    """The saddle-energy equation has no root in the bracket at this rate."""


# --- configuration ----------------------------------------------------------

class ConfigError(MismatchMseError):
    pass


class ParseError(ConfigError):
    """Config file is not valid JSON."""


class SchemaError(ConfigError):
    """Config parsed but violates the schema; carries the offending field."""

    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)
