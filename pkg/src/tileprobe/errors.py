"""Exception types shared across the engine."""

from __future__ import annotations


class TileprobeError(Exception):
    """Base class for all engine errors."""


class MalformedRow(TileprobeError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        msg = f"malformed row at line {line_no}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonNumeric(TileprobeError):
    def __init__(self, line_no: int, column: int, raw: str = ""):
        self.line_no = line_no
        self.column = column
        super().__init__(f"non-numeric value at line {line_no}, column {column}: {raw!r}")


class IoFailure(TileprobeError):
    pass


class MaxDepthReached(TileprobeError):
    pass


class SplitOnInternal(TileprobeError):
    pass


class UntrackedAttribute(TileprobeError):
    def __init__(self, attribute):
        self.attribute = attribute
        super().__init__(f"attribute {attribute!r} is not tracked by the index")


class MissingStats(TileprobeError):
    def __init__(self, attribute):
        self.attribute = attribute
        super().__init__(f"tile has no metadata for attribute {attribute!r}")


class TargetUnreachable(TileprobeError):
    pass


class AuditError(TileprobeError):
    pass
