"""Exception hierarchy.

Everything a caller can fix by changing inputs or parameters derives from
:class:`ValidationError`; the CLI maps those to exit status 2.
"""


class PupilPostError(Exception):
    pass


class ValidationError(PupilPostError, ValueError):
    pass


class TooShortError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class InvalidParamsError(ValidationError):
    pass


class InvalidWindowError(InvalidParamsError):
    pass


class DegenerateEdgesError(ValidationError):
    pass


class MismatchedBinsError(ValidationError):
    pass


class ZeroSupportError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class EmptyStreamError(EmptyInputError):
    pass


class EmptyTrajectoryError(EmptyInputError):
    pass


class ZeroSpanError(ValidationError):
    pass


class OutOfBoundsError(ValidationError):
    pass


class EmptySpecError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, line: int, column: int, reason: str, path=None):
        self.line = line
        self.column = column
        self.reason = reason
        self.path = path
        where = f"{path}:" if path is not None else ""
        super().__init__(f"{where}line {line}, column {column}: {reason}")


class SortError(ParseError):
    def __init__(self, line: int, reason: str = "timestamps out of order", path=None):
        super().__init__(line, 1, reason, path)


class NonUniformSamplingError(ValidationError):
    pass


class InvariantError(PupilPostError):
    """An internal post-condition did not hold (a bug, not bad input)."""
