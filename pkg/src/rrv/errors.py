"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`RRVError` so
the CLI can map failures onto exit codes (data errors vs. internal bugs).
"""


class RRVError(Exception):
    """Base class for package errors."""


class DataError(RRVError):
    """Input data cannot be turned into a descriptor (maps to CLI exit 2)."""


class AntipodalVectors(DataError):
    """Two unit vectors point in opposite directions; the minimal rotation axis is undefined."""


class InvalidParams(RRVError, ValueError):
    pass


class EmptyAfterTrim(DataError):
    pass


class DegenerateTrajectory(DataError):
    pass


class TooShort(DataError):
    pass


class DegenerateFrame(DataError):
    """Shoulder-center and hip joints are (nearly) collinear."""


class ZeroBone(DataError):
    pass


class StructureMismatch(DataError):
    pass


class EmptySequence(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class TooFewPatches(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class SingleClass(DataError):
    pass


class UnknownSubjects(DataError):
    pass


class ParseError(DataError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"row {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ShapeError(ParseError):
    pass


class FrameCountMismatch(ParseError):
    pass
