"""Parametric synthetic face corpus.

Each face is an ellipse head with bar eyes, brows, nose and a curved mouth,
rendered under a small random similarity pose. One cue per attribute:

* gender: head aspect ratio
* age: spatial frequency of a stripe "wrinkle" texture on forehead and cheeks
* expression: mouth curvature
* ethnicity: base skin intensity

A cue strength of 0 removes the class dependence of that cue entirely.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dataset import (
    ETHNICITIES, EXPRESSIONS, FGNET68, GENDERS, DatasetRecord, LandmarkSet,
    save_landmarks, save_manifest, write_image,
)
from .errors import DataError

EYE_DISTANCE = 30.0
HEAD_HALF_WIDTH = 0.95 * EYE_DISTANCE
SKIN = {"white": 200.0, "black": 75.0, "indian": 120.0, "other": 160.0}
NEUTRAL_SKIN = 150.0
AGE_SLOPE = 0.003  # wrinkle cycles per pixel per year
WRINKLE_AMP = 22.0
# mouth sag in px per expression at full strength (positive: centre lower, a smile)
MOUTH_SAG = dict(zip(EXPRESSIONS, (-8.0, -4.0, 0.0, 8.0, -12.0, 4.0)))


@dataclass
class CorpusSpec:
    n_train: int = 400
    n_test: int = 200
    image_size: tuple[int, int] = (128, 128)
    genders: list[str] = field(default_factory=lambda: list(GENDERS))
    expressions: list[str] = field(default_factory=lambda: list(EXPRESSIONS))
    ethnicities: list[str] = field(default_factory=lambda: list(ETHNICITIES))
    max_age: int = 60
    gender_strength: float = 1.0
    age_strength: float = 1.0
    expression_strength: float = 1.0
    ethnicity_strength: float = 1.0
    # 0: both genders age alike; 1: female wrinkles keep a fixed frequency and
    # age shows only in their contrast
    gender_dependent_aging: float = 0.0
    rotation_deg: float = 6.0
    scale_jitter: float = 0.06
    shift_px: float = 4.0
    noise: float = 0.0

    def validate(self) -> "CorpusSpec":
        if self.n_train < 1 or self.n_test < 0:
            raise DataError("n_train must be >= 1 and n_test >= 0")
        for name, allowed in (("genders", GENDERS), ("expressions", EXPRESSIONS),
                              ("ethnicities", ETHNICITIES)):
            vals = getattr(self, name)
            bad = [v for v in vals if v not in allowed]
            if bad or not vals:
                raise DataError(f"{name} must be a non-empty subset of {', '.join(allowed)}")
        if not 0 < self.max_age <= 60:
            raise DataError("max_age must lie in (0, 60]")
        if min(self.image_size) < 64:
            raise DataError("image_size must be at least 64x64")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise DataError(f"unknown corpus spec keys: {', '.join(sorted(unknown))}")
        d = dict(data)
        if "image_size" in d:
            d["image_size"] = tuple(int(v) for v in d["image_size"])
        return cls(**d).validate()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["image_size"] = list(self.image_size)
        return d


def load_corpus_spec(path) -> CorpusSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"corpus spec not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"corpus spec {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DataError("corpus spec must be a JSON object")
    return CorpusSpec.from_dict(data)


@dataclass
class FaceParams:
    gender: str
    age: int
    expression: str
    ethnicity: str
    aspect: float
    skin: float
    sag: float
    wrinkle_freq: float
    wrinkle_amp: float
    wrinkle_phase: float
    angle: float
    scale: float
    centre: tuple[float, float]


def _draw_params(rng: np.random.Generator, spec: CorpusSpec) -> FaceParams:
    gender = spec.genders[rng.integers(len(spec.genders))]
    age = int(rng.integers(spec.max_age))
    expression = spec.expressions[rng.integers(len(spec.expressions))]
    ethnicity = spec.ethnicities[rng.integers(len(spec.ethnicities))]
    g_sign = -1.0 if gender == "male" else 1.0
    aspect = 1.25 + 0.1 * g_sign * spec.gender_strength + rng.uniform(-0.03, 0.03)
    skin = NEUTRAL_SKIN + spec.ethnicity_strength * (SKIN[ethnicity] - NEUTRAL_SKIN)
    skin += rng.uniform(-8, 8)
    sag = spec.expression_strength * MOUTH_SAG[expression] + rng.uniform(-0.4, 0.4)
    eff_age = spec.age_strength * age + (1 - spec.age_strength) * spec.max_age / 2
    freq = 0.06 + AGE_SLOPE * eff_age
    amp = WRINKLE_AMP
    if gender == "female":
        # female aging moves from frequency to contrast as the mix grows
        mix = spec.gender_dependent_aging
        freq = (1 - mix) * freq + mix * (0.06 + AGE_SLOPE * spec.max_age / 2)
        amp = (1 - mix) * amp + mix * WRINKLE_AMP * (0.1 + 0.9 * eff_age / spec.max_age)
    rows, cols = spec.image_size
    return FaceParams(
        gender, age, expression, ethnicity, aspect, skin, sag, freq, amp,
        wrinkle_phase=rng.uniform(0, 2 * np.pi),
        angle=np.deg2rad(rng.uniform(-spec.rotation_deg, spec.rotation_deg)),
        scale=1.0 + rng.uniform(-spec.scale_jitter, spec.scale_jitter),
        centre=(cols / 2 + rng.uniform(-spec.shift_px, spec.shift_px),
                rows / 2 + 4 + rng.uniform(-spec.shift_px, spec.shift_px)),
    )


def _layout(p: FaceParams) -> dict:
    a = HEAD_HALF_WIDTH
    b = a * p.aspect
    d = EYE_DISTANCE
    eye_y = -0.2 * b
    return {
        "a": a, "b": b, "d": d, "eye_y": eye_y,
        "brow_y": eye_y - 0.2 * d,
        "mouth_y": 0.5 * b, "mouth_w": 0.42 * d, "mouth_t": 0.15 * d,
        "nose_top": eye_y + 0.15 * d, "nose_tip": 0.22 * b,
    }


def face_landmarks_local(p: FaceParams) -> np.ndarray:
    """68 points in the FG-NET ordering, face-local coordinates (y down)."""
    L = _layout(p)
    a, b, d = L["a"], L["b"], L["d"]
    pts = []
    phi = np.linspace(np.pi + 0.25, -0.25, 15)  # temple, chin, temple
    pts += list(zip(a * np.cos(phi), b * np.sin(phi)))
    bw = 0.25 * d
    for side in (+1, -1):  # right brow (image right) first, then left
        cx = side * d / 2
        xs = cx + np.linspace(-bw, bw, 6) * side
        arch = -0.04 * d * (1 - ((xs - cx) / bw) ** 2)
        pts += list(zip(xs, L["brow_y"] + arch))
    ew, eh = 0.18 * d, 0.07 * d
    for cx in (-d / 2, d / 2):  # left eye (image left), right eye
        ey = L["eye_y"]
        pts += [(cx - ew, ey), (cx, ey - eh), (cx + ew, ey), (cx, ey + eh), (cx, ey)]
    ny = np.linspace(L["nose_top"], L["nose_tip"] - 0.1 * d, 5)
    pts += [(0.0, y) for y in ny]
    nw = 0.16 * d
    base = L["nose_tip"] + 0.04 * d
    pts += [(-nw, base - 0.06 * d), (-0.6 * nw, base), (-0.25 * nw, base + 0.03 * d),
            (0.25 * nw, base + 0.03 * d), (0.6 * nw, base), (nw, base - 0.06 * d)]
    mw, mt, my = L["mouth_w"], L["mouth_t"], L["mouth_y"]

    def centre_line(x):
        return my + p.sag * (1 - (x / mw) ** 2)

    xs = np.linspace(-mw, mw, 7)
    pts += [(x, centre_line(x) - mt / 2) for x in xs]  # upper outer, left to right
    xs_low = np.linspace(mw, -mw, 7)[1:-1]
    pts += [(x, centre_line(x) + mt / 2) for x in xs_low]  # lower outer, right to left
    xs_in = np.linspace(-0.75 * mw, 0.75 * mw, 7)
    pts += [(x, centre_line(x)) for x in xs_in]
    pts += [(0.0, L["nose_tip"])]  # point 68: nose tip
    out = np.array(pts, dtype=np.float64)
    assert out.shape == (68, 2)
    return out


def _pose(p: FaceParams, local: np.ndarray) -> np.ndarray:
    c, s = np.cos(p.angle), np.sin(p.angle)
    rot = np.array([[c, -s], [s, c]]) * p.scale
    return local @ rot.T + np.array(p.centre)


def render_face(p: FaceParams, size: tuple[int, int], rng: np.random.Generator,
                noise: float, supersample: int = 2) -> np.ndarray:
    rows, cols = size
    k = supersample
    off = (np.arange(k) + 0.5) / k - 0.5
    yy, xx = np.mgrid[0:rows, 0:cols].astype(np.float64)
    yy = (yy[:, :, None, None] + off[None, None, :, None]).reshape(rows, cols, -1)
    xx = (xx[:, :, None, None] + off[None, None, None, :]).reshape(rows, cols, -1)
    # image -> face-local coordinates
    c, s = np.cos(p.angle), np.sin(p.angle)
    dx, dy = xx - p.centre[0], yy - p.centre[1]
    u = (c * dx + s * dy) / p.scale
    v = (-s * dx + c * dy) / p.scale
    L = _layout(p)
    a, b, d = L["a"], L["b"], L["d"]

    img = 30.0 + 190.0 * (xx / cols) * 0.5 + 190.0 * (yy / rows) * 0.5  # background ramp
    head = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    img = np.where(head, p.skin, img)
    wr = np.sin(2 * np.pi * p.wrinkle_freq * v + p.wrinkle_phase) * p.wrinkle_amp
    forehead = head & (v > -0.62 * b) & (v < L["brow_y"] - 0.08 * d)
    cheeks = head & (np.abs(u) > 0.35 * d) & (np.abs(u) < 0.8 * a) \
        & (v > L["eye_y"] + 0.2 * d) & (v < L["mouth_y"] - 0.05 * b)
    img = np.where(forehead | cheeks, img + wr, img)
    img = np.where(head & (v <= -0.62 * b), 40.0, img)  # hair
    for cx in (-d / 2, d / 2):
        brow = (np.abs(u - cx) <= 0.25 * d) & (np.abs(v - L["brow_y"]) <= 0.04 * d)
        img = np.where(brow, 55.0, img)
        eye = ((u - cx) / (0.18 * d)) ** 2 + ((v - L["eye_y"]) / (0.07 * d)) ** 2 <= 1.0
        img = np.where(eye, 25.0, img)
    nose = (np.abs(u) <= 0.05 * d) & (v >= L["nose_top"]) & (v <= L["nose_tip"])
    img = np.where(nose, p.skin - 45.0, img)
    mw, mt, my = L["mouth_w"], L["mouth_t"], L["mouth_y"]
    line = my + p.sag * (1 - (u / mw) ** 2)
    mouth = (np.abs(u) <= mw) & (np.abs(v - line) <= mt / 2)
    img = np.where(mouth, 45.0, img)

    img = img.mean(axis=-1)
    if noise > 0:
        img = img + rng.normal(0.0, noise, size=img.shape)
    return np.clip(img, 0.0, 255.0)


def generate_synthetic_corpus(spec: CorpusSpec, seed: int, out_dir) -> dict[str, list[DatasetRecord]]:
    """Render train/test splits, landmark files and manifests under ``out_dir``.

    Writes ``train.csv``, ``test.csv``, ``corpus.json`` plus ``images/`` and
    ``landmarks/``. Identical (spec, seed) pairs give identical bytes.
    """
    spec.validate()
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "landmarks").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    splits = {}
    for split, count in (("train", spec.n_train), ("test", spec.n_test)):
        records = []
        for i in range(count):
            p = _draw_params(rng, spec)
            img = render_face(p, spec.image_size, rng, spec.noise)
            pts = _pose(p, face_landmarks_local(p))
            eyes = _pose(p, np.array([[-EYE_DISTANCE / 2, _layout(p)["eye_y"]],
                                      [EYE_DISTANCE / 2, _layout(p)["eye_y"]]]))
            name = f"{split}_{i:04d}"
            img_path = out / "images" / f"{name}.png"
            lm_path = out / "landmarks" / f"{name}.pts"
            write_image(img_path, img)
            save_landmarks(lm_path, LandmarkSet(pts, FGNET68))
            records.append(DatasetRecord(
                image_path=img_path,
                left_eye=(round(float(eyes[0, 0]), 6), round(float(eyes[0, 1]), 6)),
                right_eye=(round(float(eyes[1, 0]), 6), round(float(eyes[1, 1]), 6)),
                landmarks_path=lm_path,
                gender=p.gender, age_years=p.age,
                expression=p.expression, ethnicity=p.ethnicity,
            ))
        save_manifest(out / f"{split}.csv", records)
        splits[split] = records
    with open(out / "corpus.json", "w", encoding="utf-8") as fh:
        json.dump({"seed": seed, **spec.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return splits
