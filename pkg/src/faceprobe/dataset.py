"""Images, manifests, landmark files and face normalisation.

Images are plain 2-D ``float64`` numpy arrays holding grey levels in
[0, 255]; :func:`as_image` validates one. Points are ``(x, y)`` with ``x``
the column and ``y`` the row, pixel centres on integer coordinates.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .errors import DataError, GeometryError

GENDERS = ("male", "female")
EXPRESSIONS = ("anger", "disgust", "fear", "happy", "sad", "surprise")
ETHNICITIES = ("white", "black", "indian", "other")

MANIFEST_HEADER = (
    "image",
    "left_eye_x",
    "left_eye_y",
    "right_eye_x",
    "right_eye_y",
    "landmarks",
    "gender",
    "age",
    "expression",
    "ethnicity",
)

# fractions of (cols, rows) where the eye centres land after normalisation
CANONICAL_LEFT_EYE = (0.3, 0.35)
CANONICAL_RIGHT_EYE = (0.7, 0.35)
DEFAULT_FACE_SIZE = (65, 60)


def as_image(arr) -> np.ndarray:
    """Return ``arr`` as a validated float64 grey-level raster."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise DataError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DataError("image contains non-finite intensities")
    if img.min() < 0.0 or img.max() > 255.0:
        raise DataError(f"intensities must lie in [0, 255], got [{img.min()}, {img.max()}]")
    return img


# --------------------------------------------------------------------------
# image files


def read_image(path) -> np.ndarray:
    """Decode a PNG or binary PGM to grey levels (Rec. 601 luma for colour)."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr", "LA"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                raw = np.asarray(im, dtype=np.float64)
                return np.clip(raw * (255.0 / 65535.0), 0.0, 255.0)
            if mode == "1":
                return np.asarray(im, dtype=np.float64) * 255.0
            return np.asarray(im.convert("L"), dtype=np.float64)
    except FileNotFoundError:
        raise DataError(f"image not found: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from None


def write_image(path, img) -> None:
    """Write a grey image as 8-bit PNG, or PGM (P5) when the suffix is .pgm."""
    data = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (data.shape[1], data.shape[0]))
            fh.write(data.tobytes())
    else:
        Image.fromarray(data, mode="L").save(path, format="PNG")


# --------------------------------------------------------------------------
# landmarks


@dataclass(frozen=True)
class Scheme:
    name: str
    n_points: int

    @classmethod
    def parse(cls, token: str | "Scheme") -> "Scheme":
        if isinstance(token, Scheme):
            return token
        t = token.strip().lower()
        if t == "fgnet68":
            return FGNET68
        if t == "cohn68":
            return COHN68
        if t.startswith("custom"):
            _, _, n = t.partition(":")
            n = n or t[len("custom"):].strip("()")
            try:
                return custom_scheme(int(n))
            except ValueError:
                pass
        raise DataError(f"unknown landmark scheme {token!r}; use fgnet68, cohn68 or custom:N")

    def __str__(self) -> str:
        return self.name.lower() if self.name != "CUSTOM" else f"custom:{self.n_points}"


FGNET68 = Scheme("FGNET68", 68)
COHN68 = Scheme("COHN68", 68)


def custom_scheme(n: int) -> Scheme:
    if n < 3:
        raise DataError(f"a landmark scheme needs at least 3 points, got {n}")
    return Scheme("CUSTOM", n)


@dataclass
class LandmarkSet:
    """Ordered annotation points of one face, as an (n, 2) array of (x, y)."""

    points: np.ndarray
    scheme: Scheme = FGNET68

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(self.points) != self.scheme.n_points:
            raise DataError(
                f"landmark count mismatch: scheme {self.scheme} expects "
                f"{self.scheme.n_points} points, got {len(self.points)}"
            )
        if not np.all(np.isfinite(self.points)):
            raise DataError("landmark coordinates must be finite")
        if np.any(self.points < 0):
            raise DataError("landmark coordinates must be non-negative")

    def __len__(self):
        return len(self.points)


def load_landmarks(path, scheme: Scheme | str | None = FGNET68) -> LandmarkSet:
    """Parse an ``n_points: N`` header followed by N ``x y`` lines.

    ``scheme=None`` accepts any count as ``custom:N``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except FileNotFoundError:
        raise DataError(f"landmark file not found: {path}") from None
    if not lines or not lines[0].lower().startswith("n_points"):
        raise DataError(f"{path}: first line must be 'n_points: <N>'")
    try:
        declared = int(lines[0].split(":", 1)[1])
    except (IndexError, ValueError):
        raise DataError(f"{path}: bad n_points header {lines[0]!r}") from None
    body = [ln for ln in lines[1:] if ln not in ("{", "}")]
    if declared != len(body):
        raise DataError(f"{path}: header declares {declared} points but {len(body)} follow")
    pts = []
    for k, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise DataError(f"{path}: line {k} must hold 'x y', got {ln!r}")
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise DataError(f"{path}: line {k} is not numeric: {ln!r}") from None
    scheme = custom_scheme(len(pts)) if scheme is None else Scheme.parse(scheme)
    return LandmarkSet(np.array(pts, dtype=np.float64).reshape(-1, 2), scheme)


def save_landmarks(path, landmarks: LandmarkSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n_points: {len(landmarks)}\n")
        for x, y in landmarks.points:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


# --------------------------------------------------------------------------
# manifests


@dataclass
class DatasetRecord:
    image_path: Path
    left_eye: tuple[float, float] | None = None
    right_eye: tuple[float, float] | None = None
    landmarks_path: Path | None = None
    gender: str | None = None
    age_years: int | None = None
    expression: str | None = None
    ethnicity: str | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def eyes(self):
        if self.left_eye is None or self.right_eye is None:
            return None
        return self.left_eye, self.right_eye


def _token(value: str, allowed: tuple[str, ...], what: str, row: int) -> str | None:
    if value == "":
        return None
    tok = value.strip().lower()
    if tok not in allowed:
        raise DataError(
            f"manifest row {row}: unknown {what} token {value!r}; allowed: {', '.join(allowed)}"
        )
    return tok


def _float(value: str, name: str, row: int) -> float | None:
    if value == "":
        return None
    try:
        out = float(value)
    except ValueError:
        raise DataError(f"manifest row {row}: field {name} is not a number: {value!r}") from None
    if not np.isfinite(out):
        raise DataError(f"manifest row {row}: field {name} must be finite")
    return out


def load_manifest(path) -> list[DatasetRecord]:
    """Read a manifest CSV; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"manifest not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise DataError(f"{path}: header must be {','.join(MANIFEST_HEADER)}")
        records = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise DataError(
                    f"manifest row {row_no}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}"
                )
            cells = dict(zip(MANIFEST_HEADER, (c.strip() for c in row)))
            if not cells["image"]:
                raise DataError(f"manifest row {row_no}: field image is empty")
            eye_vals = [_float(cells[k], k, row_no) for k in MANIFEST_HEADER[1:5]]
            if any(v is None for v in eye_vals) and not all(v is None for v in eye_vals):
                raise DataError(f"manifest row {row_no}: eye coordinates must be all present or all empty")
            age = None
            if cells["age"]:
                try:
                    age = int(cells["age"])
                except ValueError:
                    raise DataError(f"manifest row {row_no}: field age is not an integer: {cells['age']!r}") from None
                if age < 0:
                    raise DataError(f"manifest row {row_no}: field age must be >= 0")
            rec = DatasetRecord(
                image_path=base / cells["image"],
                left_eye=None if eye_vals[0] is None else (eye_vals[0], eye_vals[1]),
                right_eye=None if eye_vals[2] is None else (eye_vals[2], eye_vals[3]),
                landmarks_path=base / cells["landmarks"] if cells["landmarks"] else None,
                gender=_token(cells["gender"], GENDERS, "gender", row_no),
                age_years=age,
                expression=_token(cells["expression"], EXPRESSIONS, "expression", row_no),
                ethnicity=_token(cells["ethnicity"], ETHNICITIES, "ethnicity", row_no),
            )
            if all(v is None for v in (rec.gender, rec.age_years, rec.expression, rec.ethnicity)):
                raise DataError(f"manifest row {row_no}: at least one label is required")
            records.append(rec)
    return records


def save_manifest(path, records: list[DatasetRecord]) -> None:
    path = Path(path)
    base = path.parent

    def rel(p):
        return "" if p is None else Path(os.path.relpath(p, base)).as_posix()

    def num(v):
        return "" if v is None else repr(float(v))

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for r in records:
            le = r.left_eye or (None, None)
            re_ = r.right_eye or (None, None)
            w.writerow([
                rel(r.image_path), num(le[0]), num(le[1]), num(re_[0]), num(re_[1]),
                rel(r.landmarks_path), r.gender or "",
                "" if r.age_years is None else str(r.age_years),
                r.expression or "", r.ethnicity or "",
            ])


# --------------------------------------------------------------------------
# preprocessing


def canonical_eyes(out_rows: int, out_cols: int):
    left = (CANONICAL_LEFT_EYE[0] * out_cols, CANONICAL_LEFT_EYE[1] * out_rows)
    right = (CANONICAL_RIGHT_EYE[0] * out_cols, CANONICAL_RIGHT_EYE[1] * out_rows)
    return left, right


def normalize_face(img, left_eye, right_eye, out_rows: int = DEFAULT_FACE_SIZE[0],
                   out_cols: int = DEFAULT_FACE_SIZE[1]) -> np.ndarray:
    """Rotate, scale and crop so the eye centres land on the canonical positions.

    Bilinear sampling; output pixels whose source falls outside the input
    are 0.
    """
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    for name, (x, y) in (("left", left_eye), ("right", right_eye)):
        if not (0 <= x <= cols - 1 and 0 <= y <= rows - 1):
            raise GeometryError(f"{name} eye ({x}, {y}) lies outside the {rows}x{cols} image")
    src_l = complex(*left_eye)
    src_r = complex(*right_eye)
    if abs(src_r - src_l) < 1e-9:
        raise GeometryError("eye centres coincide; normalisation is undefined")
    dst_l, dst_r = (complex(*p) for p in canonical_eyes(out_rows, out_cols))
    # output point z maps to source a * (z - dst_l) + src_l
    a = (src_r - src_l) / (dst_r - dst_l)
    yy, xx = np.mgrid[0:out_rows, 0:out_cols].astype(np.float64)
    dx = xx - dst_l.real
    dy = yy - dst_l.imag
    sx = a.real * dx - a.imag * dy + src_l.real
    sy = a.imag * dx + a.real * dy + src_l.imag
    return kernels.bilinear_sample(img, sx, sy)


def histogram_equalize(img) -> np.ndarray:
    """Global 256-bin equalisation: level v maps to floor(255 * CDF(v)).

    Real-valued inputs are binned by their integer part, so equal bins map to
    equal outputs and rank order is preserved.
    """
    img = np.asarray(img, dtype=np.float64)
    bins = np.clip(np.floor(img), 0, 255).astype(np.intp)
    hist = np.bincount(bins.ravel(), minlength=256)
    cdf = np.cumsum(hist) / bins.size
    lut = np.floor(255.0 * cdf + 1e-9)
    return lut[bins]
