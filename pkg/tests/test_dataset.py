import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from faceprobe.dataset import (
    COHN68, FGNET68, MANIFEST_HEADER, DatasetRecord, LandmarkSet, Scheme, as_image,
    canonical_eyes, custom_scheme, histogram_equalize, load_landmarks, load_manifest,
    normalize_face, read_image, save_landmarks, save_manifest, write_image,
)
from faceprobe.errors import DataError, GeometryError

HEADER = ",".join(MANIFEST_HEADER)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# manifests ------------------------------------------------------------------

def test_manifest_three_rows(tmp_path):
    p = write(tmp_path / "m.csv", HEADER + "\n"
              "a.png,10,20,30,20,a.pts,male,34,happy,white\n"
              "b.png,,,,,,female,,,\n"
              "sub/c.png,1.5,2,3,4.25,,,,sad,other\n")
    recs = load_manifest(p)
    assert len(recs) == 3
    assert recs[0].image_path == tmp_path / "a.png"
    assert recs[0].eyes == ((10.0, 20.0), (30.0, 20.0))
    assert recs[0].age_years == 34 and recs[0].expression == "happy"
    assert recs[1].eyes is None and recs[1].landmarks_path is None
    assert recs[2].image_path == tmp_path / "sub" / "c.png"


def test_manifest_unknown_gender_token(tmp_path):
    p = write(tmp_path / "m.csv", HEADER + "\na.png,,,,,,m,,,\n")
    with pytest.raises(DataError, match="unknown gender token") as exc:
        load_manifest(p)
    assert "row 1" in str(exc.value) and "male, female" in str(exc.value)


def test_manifest_header_only_is_empty(tmp_path):
    assert load_manifest(write(tmp_path / "m.csv", HEADER + "\n")) == []


def test_manifest_bad_number_names_row_and_field(tmp_path):
    p = write(tmp_path / "m.csv", HEADER + "\na.png,1,2,3,4,,male,,,\nb.png,x,2,3,4,,male,,,\n")
    with pytest.raises(DataError, match=r"row 2: field left_eye_x"):
        load_manifest(p)


def test_manifest_requires_a_label(tmp_path):
    with pytest.raises(DataError, match="at least one label"):
        load_manifest(write(tmp_path / "m.csv", HEADER + "\na.png,,,,,,,,,\n"))


def test_manifest_round_trip(tmp_path):
    recs = [DatasetRecord(tmp_path / "x.png", (1.25, 2.0), (3.0, 4.5), tmp_path / "x.pts",
                          "female", 12, "fear", "indian"),
            DatasetRecord(tmp_path / "y.png", gender="male")]
    save_manifest(tmp_path / "m.csv", recs)
    first = (tmp_path / "m.csv").read_bytes()
    back = load_manifest(tmp_path / "m.csv")
    assert back == recs
    save_manifest(tmp_path / "m.csv", back)
    assert (tmp_path / "m.csv").read_bytes() == first


# landmarks ------------------------------------------------------------------

def pts_file(path, n):
    lines = [f"n_points: {n}"] + [f"{i}.5 {2 * i}" for i in range(n)]
    return write(path, "\n".join(lines) + "\n")


def test_landmarks_68_fgnet(tmp_path):
    lm = load_landmarks(pts_file(tmp_path / "a.pts", 68), FGNET68)
    assert len(lm) == 68
    np.testing.assert_array_equal(lm.points[3], [3.5, 6.0])


def test_landmarks_count_mismatch(tmp_path):
    with pytest.raises(DataError, match="expects 68 points, got 67"):
        load_landmarks(pts_file(tmp_path / "a.pts", 67), FGNET68)


def test_landmarks_custom_68_accepted(tmp_path):
    lm = load_landmarks(pts_file(tmp_path / "a.pts", 68), "custom:68")
    assert lm.scheme == custom_scheme(68)


def test_landmarks_round_trip_exact(tmp_path):
    pts = np.random.default_rng(1).uniform(0, 100, size=(68, 2))
    save_landmarks(tmp_path / "a.pts", LandmarkSet(pts, COHN68))
    back = load_landmarks(tmp_path / "a.pts", COHN68)
    np.testing.assert_array_equal(back.points, pts)


def test_scheme_parse():
    assert Scheme.parse("fgnet68") is FGNET68
    assert Scheme.parse("COHN68") is COHN68
    assert Scheme.parse("custom:12").n_points == 12
    with pytest.raises(DataError):
        Scheme.parse("bogus")


def test_landmarks_reject_negative():
    with pytest.raises(DataError, match="non-negative"):
        LandmarkSet(np.full((68, 2), -1.0))


# images ---------------------------------------------------------------------

def test_image_io_png_and_pgm(tmp_path):
    img = np.arange(12, dtype=float).reshape(3, 4) * 20
    for name in ("a.png", "a.pgm"):
        write_image(tmp_path / name, img)
        np.testing.assert_array_equal(read_image(tmp_path / name), img)


def test_as_image_rejects_out_of_range():
    with pytest.raises(DataError):
        as_image(np.array([[300.0]]))
    with pytest.raises(DataError):
        as_image(np.zeros(4))


# normalisation --------------------------------------------------------------

def smooth_pattern(rows, cols):
    yy, xx = np.mgrid[0:rows, 0:cols].astype(float)
    return 127.5 + 60 * np.sin(xx / 7.0) * np.cos(yy / 9.0) + 40 * np.sin((xx + yy) / 13.0)


def test_normalize_identity_at_canonical_eyes():
    img = smooth_pattern(65, 60)
    left, right = canonical_eyes(65, 60)
    out = normalize_face(img, left, right)
    assert out.shape == (65, 60)
    np.testing.assert_allclose(out, img, atol=1e-9)


def test_normalize_default_size():
    img = smooth_pattern(100, 90)
    assert normalize_face(img, (30, 40), (60, 41)).shape == (65, 60)


def test_normalize_idempotent():
    img = smooth_pattern(100, 90)
    once = normalize_face(img, (30, 40), (60, 45))
    left, right = canonical_eyes(65, 60)
    np.testing.assert_allclose(normalize_face(once, left, right), once, atol=1e-9)


def test_normalize_rotation_invariance():
    """Rotating the input 10 degrees about the eye midpoint, with an
    independent resampler, leaves the normalised face nearly unchanged."""
    rows, cols = 160, 160
    img = smooth_pattern(rows, cols)
    left, right = np.array([60.0, 70.0]), np.array([100.0, 70.0])
    mid = (left + right) / 2
    th = np.deg2rad(10.0)
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])  # acts on (x, y)
    # output (r, c) samples input at R^-1 (p - mid) + mid, in (row, col) order
    inv = rot.T
    matrix = np.array([[inv[1, 1], inv[1, 0]], [inv[0, 1], inv[0, 0]]])
    centre_rc = mid[::-1]
    offset = centre_rc - matrix @ centre_rc
    rotated = ndimage.affine_transform(img, matrix, offset=offset, order=1, mode="constant")
    new_left = rot @ (left - mid) + mid
    new_right = rot @ (right - mid) + mid
    a = normalize_face(img, tuple(left), tuple(right))
    b = normalize_face(rotated, tuple(new_left), tuple(new_right))
    assert np.mean(np.abs(a - b)) <= 2.0


def test_normalize_coincident_eyes():
    with pytest.raises(GeometryError, match="coincide"):
        normalize_face(np.zeros((50, 50)), (10, 10), (10, 10))


def test_normalize_eye_outside_image():
    with pytest.raises(GeometryError, match="outside"):
        normalize_face(np.zeros((50, 50)), (10, 10), (80, 10))


def test_normalize_maps_eyes_to_canonical_positions():
    img = np.zeros((120, 120))
    left, right = (40.0, 50.0), (80.0, 58.0)
    img[50, 40] = 255.0
    img[58, 80] = 255.0
    out = normalize_face(img, left, right, 65, 60)
    (lx, ly), (rx, ry) = canonical_eyes(65, 60)
    assert out[int(round(ly)), int(round(lx))] > 0
    assert out[int(round(ry)), int(round(rx))] > 0


# histogram equalisation -----------------------------------------------------

def test_equalize_constant():
    out = histogram_equalize(np.full((5, 7), 93.0))
    assert np.unique(out).size == 1


def test_equalize_two_valued():
    img = np.zeros((10, 10))
    img[5:] = 255.0
    assert set(np.unique(histogram_equalize(img))) == {127.0, 255.0}


def test_equalize_uniform_histogram_stays_uniform():
    img = np.repeat(np.arange(256, dtype=float), 4).reshape(32, 32)
    out = histogram_equalize(img)
    counts = np.bincount(out.astype(int).ravel(), minlength=256)
    assert counts.max() - counts[counts > 0].min() <= 4
    assert np.unique(out).size == 256


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (9, 11), elements=st.floats(0, 255, allow_nan=False)))
def test_equalize_preserves_rank_order(img):
    out = histogram_equalize(img)
    assert out.min() >= 0 and out.max() <= 255
    order = np.argsort(img.ravel(), kind="stable")
    assert np.all(np.diff(out.ravel()[order]) >= 0)
