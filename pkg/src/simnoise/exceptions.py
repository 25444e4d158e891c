"""Exception and warning classes raised by simnoise."""


class SimNoiseError(Exception):
    """Base class for all simnoise errors."""


class ParameterError(SimNoiseError, ValueError):
    """An argument is outside its valid domain."""


class AlignmentError(SimNoiseError, ValueError):
    """Signals that must share length and sample rate do not."""


class InsufficientRepetitionsError(ParameterError):
    """Too few trials for the requested operation."""


class TraceParseError(SimNoiseError, ValueError):
    """A trace file could not be parsed.

    ``line`` is the 1-based line number in the file (header is line 1),
    or None when the problem is not tied to a single line.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = str(path) if path is not None else "<trace>"
        if line is not None:
            where = f"{where}, line {line}"
        super().__init__(f"{where}: {message}")


class ManifestError(SimNoiseError, ValueError):
    """The analysis manifest is malformed or inconsistent."""


class DegenerateStatisticError(SimNoiseError, ZeroDivisionError):
    """A ratio statistic has a zero denominator."""


class DegenerateStatisticWarning(RuntimeWarning):
    """A statistic was returned as inf/nan because its inputs are degenerate."""
