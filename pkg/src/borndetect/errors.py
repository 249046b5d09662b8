"""Exception types raised across the package."""


class BornDetectError(Exception):
    """Base class for all package errors."""


class GridTooNarrowError(BornDetectError, ValueError):
    """The wavevector grid truncates the requested spectrum."""


class EmptyMediumError(BornDetectError):
    """A sampled medium contains no molecules."""


class TooFewMoleculesError(BornDetectError, ValueError):
    pass


class RegimeViolationError(BornDetectError):
    """The resonant/large-width inequality chain does not hold."""

    def __init__(self, message, failed):
        super().__init__(message)
        self.failed = tuple(failed)


class ZeroCouplingError(BornDetectError, ValueError):
    """No detection channel: the coupling to the molecule vanishes."""


class NonConvergenceError(BornDetectError):
    """Step halving did not converge within the step budget."""


class PreconditionError(BornDetectError, ValueError):
    pass


class TooFewBinsError(BornDetectError, ValueError):
    pass


class ConfigError(BornDetectError, ValueError):
    """Invalid run configuration; ``field`` and ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line
