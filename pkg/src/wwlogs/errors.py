"""Exception and warning types shared across wwlogs."""


class MalformedLine(ValueError):
    """A log line that does not follow the expected grammar."""

    def __init__(self, reason, line=None, lineno=None):
        self.reason = reason
        self.line = line
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{reason}")


class EmptyInput(ValueError):
    pass


class InconsistentOffsets(UserWarning):
    """Too many answer events disagree with the modal UTC offset."""


class MissingFile(FileNotFoundError):
    pass


class DuplicateKey(UserWarning):
    pass


class NonNumericValue(ValueError):
    pass


class RejectedRow(UserWarning):
    """A table row was dropped because a value failed validation."""


class NonPositiveThreshold(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


class NoValidRows(ValueError):
    pass


class BadEdges(ValueError):
    pass


class UnknownMetricName(ValueError):
    pass


class InvalidParams(ValueError):
    pass
