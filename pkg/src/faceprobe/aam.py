"""Active appearance model: shape, texture and combined PCA models.

Shapes are handled as flat vectors ``(x_1..x_n, y_1..y_n)``; internally the
Procrustes code works on complex points ``x + iy``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from . import kernels
from .dataset import LandmarkSet, Scheme
from .errors import DataError, GeometryError
from .features import FeatureVector, Source
from .pca import PcaModel, fit_pca

DEFAULT_VARIANCE_KEEP = 0.98
FRAME_MARGIN = 0.05
PROCRUSTES_TOL = 1e-10
PROCRUSTES_MAX_ITER = 100

# 0-based eye landmark groups; the canonical frame puts the first group on
# the left and the second on the right, level with each other.
EYE_GROUPS = {
    "FGNET68": (range(27, 32), range(32, 37)),
    "COHN68": (range(36, 42), range(42, 48)),
}


# --------------------------------------------------------------------------
# shape vectors and Procrustes analysis


def shape_vector(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return np.concatenate([pts[:, 0], pts[:, 1]])


def shape_points(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    n = vec.size // 2
    return np.column_stack([vec[:n], vec[n:]])


def _to_complex(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return pts[:, 0] + 1j * pts[:, 1]


def _to_vec(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _normalize(z: np.ndarray) -> np.ndarray:
    z = z - z.mean()
    norm = np.linalg.norm(z)
    if norm < 1e-12:
        raise GeometryError("degenerate shape: all landmarks coincide")
    return z / norm


def _rotate_to(z: np.ndarray, ref: np.ndarray) -> np.ndarray:
    a = np.vdot(z, ref)
    if abs(a) == 0:
        return z
    return z * (a / abs(a))


def _tangent(z: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # scale onto the tangent plane through ref: (z - ref) . ref == 0
    return z / np.vdot(z, ref).real


def align_to_reference(points, reference: np.ndarray) -> np.ndarray:
    """Similarity-align one shape to a unit-norm reference; returns a shape vector."""
    ref = reference[: reference.size // 2] + 1j * reference[reference.size // 2:]
    z = _rotate_to(_normalize(_to_complex(points)), ref)
    return _to_vec(_tangent(z, ref))


def _canonical(z: np.ndarray, scheme_name: str | None) -> np.ndarray:
    groups = EYE_GROUPS.get(scheme_name or "")
    if groups is not None and z.size == 68:
        d = z[list(groups[1])].mean() - z[list(groups[0])].mean()
        if abs(d) > 1e-12:
            return z * (abs(d) / d)
    # principal axis along x, positive third moment along it
    m2 = np.sum(z * z)
    if abs(m2) > 1e-12:
        z = z * np.exp(-0.5j * np.angle(m2))
    if np.sum(z.real**3) < 0:
        z = -z
    return z


def _gpa(shapes: list, scheme_name: str | None, tol: float, max_iter: int):
    zs = [_normalize(_to_complex(s)) for s in shapes]
    mean = _canonical(zs[0], scheme_name)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        aligned = np.array([_tangent(_rotate_to(z, mean), mean) for z in zs])
        new = _canonical(_normalize(aligned.mean(axis=0)), scheme_name)
        moved = np.linalg.norm(new - mean)
        mean = new
        if moved < tol:
            break
    ref = _to_vec(mean)
    vecs = np.array([align_to_reference(s, ref) for s in shapes])
    return vecs, ref, n_iter


def _points_of(shape) -> np.ndarray:
    return shape.points if isinstance(shape, LandmarkSet) else np.asarray(shape, dtype=np.float64)


def align_shapes(shapes, tol: float = PROCRUSTES_TOL, max_iter: int = PROCRUSTES_MAX_ITER,
                 return_iterations: bool = False):
    """Generalised Procrustes alignment.

    Each shape is centred, scaled to unit norm, rotated onto the current mean
    and projected into the mean's tangent space; the mean is re-estimated,
    renormalised and put into a canonical orientation until it moves less
    than ``tol``. Returns ``(aligned vectors (N, 2n), reference mean)``.
    """
    shapes = list(shapes)
    if len(shapes) < 2:
        raise DataError("Procrustes alignment needs at least two shapes")
    pts = [_points_of(s) for s in shapes]
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise DataError("all shapes must have the same number of points")
    scheme = shapes[0].scheme.name if isinstance(shapes[0], LandmarkSet) else None
    vecs, ref, n_iter = _gpa(pts, scheme, tol, max_iter)
    if return_iterations:
        return vecs, ref, n_iter
    return vecs, ref


# --------------------------------------------------------------------------
# models


@dataclass
class ShapeModel:
    pca: PcaModel
    reference: np.ndarray  # unit-norm Procrustes mean used to align new shapes
    n_points: int
    scheme: str = "CUSTOM"

    @property
    def mean_shape(self) -> np.ndarray:
        return self.pca.mean

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.pca.components

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.pca.eigenvalues

    @property
    def n_modes(self) -> int:
        return self.pca.n_components

    def params(self, aligned) -> np.ndarray:
        return self.pca.project(aligned)

    def reconstruct(self, b) -> np.ndarray:
        return self.pca.reconstruct(b)


def build_shape_model(aligned, variance_keep: float = DEFAULT_VARIANCE_KEEP,
                      reference: np.ndarray | None = None, scheme: str = "CUSTOM") -> ShapeModel:
    aligned = np.asarray(aligned, dtype=np.float64)
    try:
        pca = fit_pca(aligned, float(variance_keep))
    except DataError:
        raise DataError("shape model needs at least two distinct shapes") from None
    if reference is None:
        reference = pca.mean / np.linalg.norm(pca.mean)
    return ShapeModel(pca, np.asarray(reference, dtype=np.float64), aligned.shape[1] // 2, scheme)


@dataclass
class TextureFrame:
    """Mean shape placed in the texture raster, with its triangulation."""

    points: np.ndarray  # (n, 2) x, y in texture-frame pixels
    triangles: np.ndarray  # (t, 3) vertex indices
    rows: int
    cols: int
    _map: tuple | None = field(default=None, repr=False, compare=False)

    def pixel_map(self):
        """(mask, triangle index per masked pixel, barycentric weights)."""
        if self._map is None:
            self._map = _rasterise(self.points, self.triangles, self.rows, self.cols)
        return self._map

    @property
    def mask(self) -> np.ndarray:
        return self.pixel_map()[0]

    @property
    def n_pixels(self) -> int:
        return int(self.mask.sum())


def frame_points(mean_shape, rows: int, cols: int, margin: float = FRAME_MARGIN) -> np.ndarray:
    """Scale and centre a shape into a rows x cols frame, keeping aspect ratio."""
    pts = shape_points(mean_shape)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = np.maximum(hi - lo, 1e-12)
    usable = (1 - 2 * margin) * np.array([cols - 1, rows - 1], dtype=np.float64)
    scale = np.min(usable / extent)
    centre = np.array([(cols - 1) / 2.0, (rows - 1) / 2.0])
    return (pts - (lo + hi) / 2.0) * scale + centre


def _triangulate(points: np.ndarray) -> np.ndarray:
    try:
        tri = Delaunay(points).simplices
    except Exception as exc:  # qhull raises its own error type
        raise GeometryError(f"cannot triangulate mean shape: {exc}") from None
    tri = np.sort(tri, axis=1)
    tri = tri[np.lexsort(tri.T[::-1])]
    p = points[tri]
    area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    if np.any(area < 1e-9):
        raise GeometryError("mean shape triangulation contains a zero-area triangle")
    return tri.astype(np.intp)


def _rasterise(points, triangles, rows, cols):
    owner = np.full((rows, cols), -1, dtype=np.intp)
    bary = np.zeros((rows, cols, 3))
    eps = 1e-9
    for t, (i, j, k) in enumerate(triangles):
        a, b, c = points[i], points[j], points[k]
        x0 = max(int(np.floor(min(a[0], b[0], c[0]))), 0)
        x1 = min(int(np.ceil(max(a[0], b[0], c[0]))), cols - 1)
        y0 = max(int(np.floor(min(a[1], b[1], c[1]))), 0)
        y1 = min(int(np.ceil(max(a[1], b[1], c[1]))), rows - 1)
        if x1 < x0 or y1 < y0:
            continue
        yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
        det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1])
        l0 = ((b[1] - c[1]) * (xx - c[0]) + (c[0] - b[0]) * (yy - c[1])) / det
        l1 = ((c[1] - a[1]) * (xx - c[0]) + (a[0] - c[0]) * (yy - c[1])) / det
        l2 = 1.0 - l0 - l1
        inside = (l0 >= -eps) & (l1 >= -eps) & (l2 >= -eps)
        sub_owner = owner[y0:y1 + 1, x0:x1 + 1]
        take = inside & (sub_owner < 0)
        sub_owner[take] = t
        sub_bary = bary[y0:y1 + 1, x0:x1 + 1]
        sub_bary[take] = np.stack([l0[take], l1[take], l2[take]], axis=-1)
    mask = owner >= 0
    return mask, owner[mask], bary[mask]


def texture_frame(mean_shape, rows: int, cols: int) -> TextureFrame:
    if rows < 2 or cols < 2:
        raise DataError("texture frame must be at least 2x2")
    pts = frame_points(mean_shape, rows, cols)
    return TextureFrame(pts, _triangulate(pts), int(rows), int(cols))


def warp_to_mean(img, landmarks, frame: TextureFrame) -> np.ndarray:
    """Piecewise-affine warp of the annotated face onto the frame's mean shape.

    Returns the masked pixels of the shape-free patch, row-major.
    """
    src = _points_of(landmarks)
    if len(src) != len(frame.points):
        raise DataError(f"expected {len(frame.points)} landmarks, got {len(src)}")
    _, tri_idx, bary = frame.pixel_map()
    corners = src[frame.triangles[tri_idx]]  # (pixels, 3, 2)
    sx = np.einsum("pk,pk->p", bary, corners[:, :, 0])
    sy = np.einsum("pk,pk->p", bary, corners[:, :, 1])
    return kernels.bilinear_sample(np.asarray(img, dtype=np.float64), sx, sy)


def _standardise(g: np.ndarray) -> np.ndarray:
    g = g - g.mean()
    sd = g.std()
    return g / sd if sd > 0 else g


def normalize_texture(g, reference: np.ndarray) -> np.ndarray:
    """Remove offset and gain relative to a zero-mean, unit-variance reference."""
    g = np.asarray(g, dtype=np.float64)
    g = g - g.mean()
    alpha = float(g @ reference) / g.size
    if abs(alpha) < 1e-12:
        return _standardise(g)
    return g / alpha


@dataclass
class TextureModel:
    pca: PcaModel
    reference: np.ndarray
    frame: TextureFrame

    @property
    def mean_texture(self) -> np.ndarray:
        return self.pca.mean

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.pca.components

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.pca.eigenvalues

    @property
    def texture_rows(self) -> int:
        return self.frame.rows

    @property
    def texture_cols(self) -> int:
        return self.frame.cols

    @property
    def patch_mask(self) -> np.ndarray:
        return self.frame.mask

    @property
    def n_modes(self) -> int:
        return self.pca.n_components

    def params(self, patch) -> np.ndarray:
        return self.pca.project(normalize_texture(patch, self.reference))

    def as_image(self, vec) -> np.ndarray:
        out = np.zeros((self.frame.rows, self.frame.cols))
        out[self.frame.mask] = vec
        return out


def build_texture_model(patches, frame: TextureFrame,
                        variance_keep: float = DEFAULT_VARIANCE_KEEP,
                        max_iter: int = 100) -> TextureModel:
    """Photometrically normalise the patches against their own mean, then PCA."""
    patches = [np.asarray(p, dtype=np.float64) for p in patches]
    if len(patches) < 2:
        raise DataError("texture model needs at least two patches")
    n = patches[0].size
    if any(p.size != n for p in patches):
        raise DataError("all shape-free patches must have the same length")
    ref = _standardise(patches[0])
    for _ in range(max_iter):
        mean = np.mean([normalize_texture(p, ref) for p in patches], axis=0)
        new = _standardise(mean)
        moved = np.linalg.norm(new - ref) / np.sqrt(n)
        ref = new
        if moved < 1e-14:
            break
    normed = np.array([normalize_texture(p, ref) for p in patches])
    pca = fit_pca(normed, float(variance_keep))
    return TextureModel(pca, ref, frame)


@dataclass
class AppearanceModel:
    shape: ShapeModel
    texture: TextureModel
    w_s: float
    pca: PcaModel  # over stacked (w_s * b_s ; b_g)

    @property
    def q(self) -> np.ndarray:
        return self.pca.components

    @property
    def q_s(self) -> np.ndarray:
        return self.pca.components[: self.shape.n_modes]

    @property
    def q_g(self) -> np.ndarray:
        return self.pca.components[self.shape.n_modes:]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.pca.eigenvalues

    @property
    def n_appearance_params(self) -> int:
        return self.pca.n_components

    def stack(self, b_s, b_g) -> np.ndarray:
        return np.concatenate([self.w_s * np.asarray(b_s), np.asarray(b_g)], axis=-1)


def build_combined_model(shape: ShapeModel, texture: TextureModel, b_s, b_g,
                         variance_keep: float = DEFAULT_VARIANCE_KEEP) -> AppearanceModel:
    b_s = np.atleast_2d(np.asarray(b_s, dtype=np.float64))
    b_g = np.atleast_2d(np.asarray(b_g, dtype=np.float64))
    if b_s.shape[0] == 0 or b_s.shape[0] != b_g.shape[0]:
        raise DataError("combined model needs matching, non-empty shape/texture parameter sets")
    w_s = float(np.sqrt(texture.eigenvalues.sum() / shape.eigenvalues.sum()))
    stacked = np.hstack([w_s * b_s, b_g])
    return AppearanceModel(shape, texture, w_s, fit_pca(stacked, float(variance_keep)))


def build_appearance_model(images, landmarks, texture_size=(60, 60),
                           variance_keep: float = DEFAULT_VARIANCE_KEEP):
    """Fit all three stages; returns ``(model, training appearance params)``."""
    images = list(images)
    landmarks = list(landmarks)
    if len(images) != len(landmarks):
        raise DataError("one landmark set per image is required")
    aligned, ref = align_shapes(landmarks)
    scheme = landmarks[0].scheme.name if isinstance(landmarks[0], LandmarkSet) else "CUSTOM"
    shape = build_shape_model(aligned, variance_keep, reference=ref, scheme=scheme)
    frame = texture_frame(shape.mean_shape, *texture_size)
    patches = [warp_to_mean(img, lm, frame) for img, lm in zip(images, landmarks)]
    texture = build_texture_model(patches, frame, variance_keep)
    b_s = shape.params(aligned)
    b_g = np.array([texture.params(p) for p in patches])
    model = build_combined_model(shape, texture, b_s, b_g, variance_keep)
    return model, model.pca.project(model.stack(b_s, b_g))


def appearance_params(img, landmarks, model: AppearanceModel) -> FeatureVector:
    """Appearance vector c of an annotated face (pose is discarded)."""
    pts = _points_of(landmarks)
    if len(pts) != model.shape.n_points:
        raise DataError(f"model expects {model.shape.n_points} landmarks, got {len(pts)}")
    b_s = model.shape.params(align_to_reference(pts, model.shape.reference))
    b_g = model.texture.params(warp_to_mean(img, pts, model.texture.frame))
    return FeatureVector(model.pca.project(model.stack(b_s, b_g)), Source.AAM)


def render_mode(model: AppearanceModel, c) -> tuple[np.ndarray, np.ndarray]:
    """Shape vector and texture vector generated by appearance vector ``c``."""
    b_sg = model.pca.reconstruct(np.asarray(c, dtype=np.float64))
    ns = model.shape.n_modes
    shape = model.shape.reconstruct(b_sg[:ns] / model.w_s)
    texture = model.texture.pca.reconstruct(b_sg[ns:])
    return shape, texture


def synthesize_modes(model: AppearanceModel, mode_index: int, multiples=(-3.0, 0.0, 3.0)):
    """Renderings at ``k * sqrt(lambda)`` along one appearance mode.

    Returns a list of ``(shape points (n, 2), texture image)`` pairs, the
    texture shown in the mean-shape frame.
    """
    if not 0 <= mode_index < model.n_appearance_params:
        raise DataError(
            f"mode index {mode_index} out of range; model has {model.n_appearance_params} modes"
        )
    out = []
    sd = np.sqrt(model.eigenvalues[mode_index])
    for k in multiples:
        c = np.zeros(model.n_appearance_params)
        c[mode_index] = k * sd
        shape, texture = render_mode(model, c)
        out.append((shape_points(shape), model.texture.as_image(texture)))
    return out


def render_image(model: AppearanceModel, c, background: float = 0.0) -> np.ndarray:
    """Face generated by ``c``: its texture warped onto its shape in the frame.

    The shape is placed with the same scale and offset that put the mean
    shape into the texture frame. Texture values are in normalised units.
    """
    shape, texture = render_mode(model, c)
    frame = model.texture.frame
    mean_pts = shape_points(model.shape.mean_shape)
    scale = np.linalg.norm(frame.points - frame.points.mean(0)) / np.linalg.norm(mean_pts - mean_pts.mean(0))
    offset = frame.points.mean(0) - scale * mean_pts.mean(0)
    target = shape_points(shape) * scale + offset
    mask, tri_idx, bary = _rasterise(target, frame.triangles, frame.rows, frame.cols)
    src = frame.points[frame.triangles[tri_idx]]
    sx = np.einsum("pk,pk->p", bary, src[:, :, 0])
    sy = np.einsum("pk,pk->p", bary, src[:, :, 1])
    out = np.full((frame.rows, frame.cols), float(background))
    out[mask] = kernels.bilinear_sample(model.texture.as_image(texture), sx, sy)
    return out
