"""Facial attribute classification from AAM, Gabor, LBP and wavelet features."""

from .errors import DataError, FaceprobeError, GeometryError, ModelFormatError, NumericError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DataError", "FaceprobeError", "GeometryError", "ModelFormatError",
    "NumericError", "__version__",
]
