"""Exception hierarchy shared by the carving pipeline."""


class CarveError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(CarveError, ValueError):
    pass


class SignatureParseError(InvalidArgumentError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class SignatureValidationError(InvalidArgumentError):
    pass


class PackingError(InvalidArgumentError):
    pass


class ScanError(CarveError, OSError):
    def __init__(self, start: int, end: int, reason: str = "read failed"):
        super().__init__(f"cannot read image bytes [{start}, {end}): {reason}")
        self.start = start
        self.end = end


class SanitizationError(CarveError):
    pass


class ImageMismatchError(CarveError):
    pass


class ManifestExistsError(CarveError, FileExistsError):
    pass


class InvariantViolation(CarveError, AssertionError):
    pass
