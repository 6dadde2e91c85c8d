"""Exception hierarchy shared by all engines.

Every error carries an ``exit_code`` so the command-line front end can map
failures to distinct nonzero statuses without a lookup table.
"""


class IndmathError(Exception):
    exit_code = 1


class InvalidJoint(IndmathError, ValueError):
    exit_code = 10


class DegenerateAngle(IndmathError, ValueError):
    exit_code = 11


class ImageTooSmall(IndmathError, ValueError):
    exit_code = 20


class NonPositiveWind(IndmathError, ValueError):
    exit_code = 30


class NonPositiveDownwind(IndmathError, ValueError):
    exit_code = 31


class EmptyScenario(IndmathError, ValueError):
    exit_code = 40


class DimensionMismatch(IndmathError, ValueError):
    exit_code = 41


class IterationLimit(IndmathError, RuntimeError):
    exit_code = 42


class NotConverged(IndmathError, RuntimeError):
    """Raised only on request; the solver normally returns a flagged field."""

    exit_code = 50


class GridMismatch(IndmathError, ValueError):
    exit_code = 51


class InputFileNotFound(IndmathError, FileNotFoundError):
    exit_code = 60


class ParseError(IndmathError, ValueError):
    exit_code = 61

    def __init__(self, file, line, field, message=""):
        self.file = str(file)
        self.line = line
        self.field = field
        detail = f"{self.file}:{line}: field '{field}'"
        if message:
            detail += f": {message}"
        super().__init__(detail)


class UnitHeaderMismatch(IndmathError, ValueError):
    exit_code = 62


class UnsupportedFormat(IndmathError, ValueError):
    exit_code = 70


class CorruptHeader(IndmathError, ValueError):
    exit_code = 71
