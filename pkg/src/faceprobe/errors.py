"""Exception hierarchy. The CLI maps these onto exit codes."""


class FaceprobeError(Exception):
    """Base class for every error raised by the package."""


class DataError(FaceprobeError, ValueError):
    """Malformed input files, labels, shapes or geometry (CLI exit 2)."""


class GeometryError(DataError):
    """Degenerate geometry: coincident eyes, zero-area triangles, collapsed shapes."""


class ModelFormatError(DataError):
    """A model bundle is truncated, corrupt, of another version or another task."""


class NumericError(FaceprobeError, ArithmeticError):
    """Training diverged or a decomposition produced nothing usable (CLI exit 3)."""
