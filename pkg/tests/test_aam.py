import numpy as np
import pytest

from faceprobe import aam
from faceprobe.dataset import LandmarkSet
from faceprobe.errors import DataError, GeometryError
from faceprobe.features import Source
from faceprobe.pca import fit_pca

KEEP = 0.98
TEXTURE = (40, 40)


def similarity(points, scale, angle, shift):
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return scale * points @ rot.T + shift


def random_shape(rng, n=12):
    return rng.normal(size=(n, 2)) * [20, 30] + 50


@pytest.fixture(scope="module")
def built(aam_faces):
    images, landmarks = aam_faces
    model, params = aam.build_appearance_model(images, landmarks, TEXTURE, KEEP)
    return model, params


# Procrustes ----------------------------------------------------------------

def test_procrustes_recovers_similarity_copies(rng):
    base = random_shape(rng)
    shapes = [similarity(base, rng.uniform(0.5, 3), rng.uniform(-np.pi, np.pi),
                         rng.normal(size=2) * 40) for _ in range(8)]
    aligned, ref = aam.align_shapes(shapes)
    assert np.max(np.abs(aligned - aligned[0])) <= 1e-8
    # the mean is the base shape up to a similarity
    back = aam.align_to_reference(base, ref)
    assert np.max(np.abs(back - aligned[0])) <= 1e-8


def test_procrustes_similarity_invariant(rng):
    shapes = [random_shape(rng) for _ in range(6)]
    a, _ = aam.align_shapes(shapes)
    moved = [similarity(s, 2.5, 0.7, np.array([13.0, -4.0])) for s in shapes]
    b, _ = aam.align_shapes(moved)
    assert np.max(np.abs(a - b)) <= 1e-8


def test_procrustes_two_shapes_mean_is_midpoint(rng):
    shapes = [random_shape(rng), random_shape(rng)]
    aligned, ref = aam.align_shapes(shapes)
    mid = aligned.mean(axis=0)
    np.testing.assert_allclose(mid / np.linalg.norm(mid), ref, atol=1e-9)


def test_procrustes_identical_converges_fast(rng):
    base = random_shape(rng)
    _, _, n_iter = aam.align_shapes([base, base.copy()], return_iterations=True)
    assert n_iter == 1


def test_procrustes_errors(rng):
    with pytest.raises(DataError):
        aam.align_shapes([random_shape(rng)])
    with pytest.raises(DataError):
        aam.align_shapes([random_shape(rng, 10), random_shape(rng, 12)])
    with pytest.raises(GeometryError):
        aam.align_shapes([np.ones((5, 2)), random_shape(rng, 5)])


# shape model -----------------------------------------------------------------

def test_shape_model_rank_one(rng):
    mean = rng.normal(size=20)
    d = rng.normal(size=20)
    aligned = mean + np.outer(rng.normal(size=10), d)
    model = aam.build_shape_model(aligned, KEEP)
    assert model.n_modes == 1
    np.testing.assert_allclose(model.params(model.mean_shape), [0.0], atol=1e-12)


def test_shape_model_needs_distinct_shapes():
    with pytest.raises(DataError):
        aam.build_shape_model(np.ones((4, 10)))


def test_shape_model_consistency(built, aam_faces):
    model = built[0].shape
    q = model.eigenvectors
    np.testing.assert_allclose(q.T @ q, np.eye(model.n_modes), atol=1e-9)
    assert np.all(np.diff(model.eigenvalues) <= 0) and np.all(model.eigenvalues >= 0)
    aligned, _ = aam.align_shapes(aam_faces[1])
    resid = []
    for x in aligned:
        b = model.params(x)
        np.testing.assert_allclose(b, q.T @ (x - model.mean_shape), atol=1e-12)
        r = x - model.reconstruct(b)
        assert np.max(np.abs(q.T @ r)) <= 1e-8
        resid.append(r @ r)
    assert np.mean(resid) <= (1 - KEEP) * model.pca.total_variance


# warping -----------------------------------------------------------------------

def test_frame_keeps_margin_and_aspect(rng):
    pts = random_shape(rng)
    fp = aam.frame_points(aam.shape_vector(pts), 30, 50)
    assert fp[:, 0].min() >= 0.05 * 49 - 1e-9 and fp[:, 0].max() <= 0.95 * 49 + 1e-9
    assert fp[:, 1].min() >= 0.05 * 29 - 1e-9 and fp[:, 1].max() <= 0.95 * 29 + 1e-9
    ratio = np.ptp(fp, axis=0) / np.ptp(pts, axis=0)
    assert abs(ratio[0] - ratio[1]) <= 1e-9


def test_warp_constant_image(built):
    frame = built[0].texture.frame
    img = np.full((80, 80), 117.0)
    patch = aam.warp_to_mean(img, frame.points + 10, frame)
    np.testing.assert_allclose(patch, 117.0, atol=1e-9)


def test_warp_identity(built, rng):
    frame = built[0].texture.frame
    img = rng.uniform(0, 255, size=(frame.rows, frame.cols))
    patch = aam.warp_to_mean(img, frame.points, frame)
    assert np.max(np.abs(patch - img[frame.mask])) <= 1e-9


def test_warp_deterministic(built, aam_faces):
    frame = built[0].texture.frame
    img, lm = aam_faces[0][0], aam_faces[1][0]
    assert np.array_equal(aam.warp_to_mean(img, lm, frame), aam.warp_to_mean(img, lm, frame))


def test_warp_landmark_count_mismatch(built):
    frame = built[0].texture.frame
    with pytest.raises(DataError):
        aam.warp_to_mean(np.zeros((60, 60)), frame.points[:-1], frame)


def test_degenerate_triangulation():
    line = np.column_stack([np.arange(5.0), np.arange(5.0)])
    with pytest.raises(GeometryError):
        aam.texture_frame(aam.shape_vector(np.vstack([line, line + 1e-14])), 20, 20)


# texture and combined models -------------------------------------------------------

def test_texture_model(built):
    tex = built[0].texture
    q = tex.eigenvectors
    np.testing.assert_allclose(q.T @ q, np.eye(tex.n_modes), atol=1e-9)
    assert tex.mean_texture.size == tex.patch_mask.sum()
    np.testing.assert_allclose(tex.params(tex.mean_texture), 0.0, atol=1e-9)


def test_two_patches_one_mode(built, rng):
    frame = built[0].texture.frame
    patches = [rng.uniform(0, 255, frame.n_pixels) for _ in range(2)]
    assert aam.build_texture_model(patches, frame, KEEP).n_modes == 1


def test_texture_length_mismatch(built):
    frame = built[0].texture.frame
    with pytest.raises(DataError):
        aam.build_texture_model([np.ones(10), np.arange(11.0)], frame)


def test_combined_model_invariants(built):
    model, params = built
    q = model.q
    np.testing.assert_allclose(q.T @ q, np.eye(model.n_appearance_params), atol=1e-9)
    assert model.q_s.shape[0] == model.shape.n_modes
    assert model.q_g.shape[0] == model.texture.n_modes
    assert np.isclose(model.w_s ** 2, model.texture.eigenvalues.sum() / model.shape.eigenvalues.sum())
    assert params.shape[1] == model.n_appearance_params
    np.testing.assert_allclose(model.pca.project(model.pca.mean), 0.0, atol=1e-12)


def test_combined_retention(built):
    pca = built[0].pca
    assert pca.eigenvalues.sum() >= KEEP * pca.total_variance - 1e-12


def test_texture_linear_in_shape_needs_few_modes(rng):
    b_s = rng.normal(size=(30, 3)) * [3.0, 2.0, 1.0]
    b_g = b_s @ rng.normal(size=(3, 7))
    shape = aam.ShapeModel(fit_pca(b_s, 3), np.zeros(6), 3)
    texture = aam.TextureModel(fit_pca(b_g, 3), np.zeros(7), None)
    model = aam.build_combined_model(shape, texture, b_s, b_g, KEEP)
    assert model.n_appearance_params <= shape.n_modes + 1


def test_combined_empty_error(built):
    model = built[0]
    with pytest.raises(DataError):
        aam.build_combined_model(model.shape, model.texture, np.zeros((0, 2)), np.zeros((0, 2)))


def test_appearance_params_of_training_image(built, aam_faces):
    model, params = built
    for i in (0, 17, 49):
        c = aam.appearance_params(aam_faces[0][i], aam_faces[1][i], model)
        assert c.source is Source.AAM and c.dims == model.n_appearance_params
        np.testing.assert_allclose(c.values, params[i], atol=1e-9)


def test_mean_face_has_zero_params(built):
    model = built[0]
    img = aam.render_image(model, np.zeros(model.n_appearance_params))
    c = aam.appearance_params(img, model.texture.frame.points, model).values
    assert np.linalg.norm(c) <= 1e-6 * np.sqrt(model.eigenvalues.sum())


def test_appearance_params_landmark_mismatch(built):
    model = built[0]
    with pytest.raises(DataError):
        aam.appearance_params(np.zeros((60, 60)), np.zeros((3, 2)), model)


def test_synthesize_modes(built):
    model = built[0]
    renders = aam.synthesize_modes(model, 0)
    (lo, _), (mid, tex0), (hi, _) = renders
    np.testing.assert_allclose(mid, aam.shape_points(model.shape.mean_shape), atol=1e-12)
    np.testing.assert_allclose(tex0[model.texture.patch_mask], model.texture.mean_texture, atol=1e-12)
    np.testing.assert_allclose(hi - mid, mid - lo, atol=1e-12)
    with pytest.raises(DataError):
        aam.synthesize_modes(model, model.n_appearance_params)


def test_landmarkset_input_matches_points(built, aam_faces):
    model = built[0]
    lm = aam_faces[1][3]
    assert isinstance(lm, LandmarkSet)
    a = aam.appearance_params(aam_faces[0][3], lm, model).values
    b = aam.appearance_params(aam_faces[0][3], lm.points, model).values
    assert np.array_equal(a, b)
