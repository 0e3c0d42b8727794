"""Task orchestration: extractor wiring, per-task training, the gender to age
cascade, combined inference and evaluation."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from . import aam as aam_mod
from .dataset import (
    DEFAULT_FACE_SIZE, ETHNICITIES, EXPRESSIONS, GENDERS, DatasetRecord, LandmarkSet,
    Scheme, as_image, histogram_equalize, load_landmarks, normalize_face, read_image,
)
from .errors import DataError
from .gabor import (
    DEFAULT_F, DEFAULT_GRID_STEP, DEFAULT_K_MAX, DEFAULT_SIGMA, build_gabor_bank, gabor_features,
)
from .lbp import lbp_block_histograms
from .mlp import MlpModel, TargetScheme, TrainConfig, encode_targets, train_mlp
from .pca import PcaModel, fit_pca
from .wavelet import daubechies_filters, wavelet_features

THREADS_ENV = "FACEPROBE_THREADS"


class Task(str, Enum):
    GENDER = "gender"
    AGE = "age"
    AGE_MALE = "age_male"
    AGE_FEMALE = "age_female"
    EXPRESSION = "expression"
    ETHNICITY = "ethnicity"


class Extractor(str, Enum):
    AAM = "aam"
    GABOR = "gabor"
    LBP = "lbp"
    WD = "wd"


EXTRACTOR_TOKENS = tuple(e.value for e in Extractor)

AGE_RANGES = ((0, 10), (10, 20), (20, 30), (30, 40), (40, 50), (50, 60))
AGE_LABELS = tuple(f"{lo}-{hi}" for lo, hi in AGE_RANGES)

TASK_LABELS = {
    Task.GENDER: GENDERS,
    Task.AGE: AGE_LABELS,
    Task.AGE_MALE: AGE_LABELS,
    Task.AGE_FEMALE: AGE_LABELS,
    Task.EXPRESSION: EXPRESSIONS,
    Task.ETHNICITY: ETHNICITIES,
}

REPORT_HEADS = ("gender", "age", "expression", "ethnicity")


def age_range_label(age) -> str:
    """Lower-inclusive 10-year bins; 60 itself falls in the last bin."""
    if age is None:
        raise DataError("record has no age")
    a = float(age)
    if not 0 <= a <= AGE_RANGES[-1][1]:
        raise DataError(f"age {age} outside the modelled range 0-60")
    for (lo, hi), label in zip(AGE_RANGES, AGE_LABELS):
        if lo <= a < hi:
            return label
    return AGE_LABELS[-1]


def record_label(record: DatasetRecord, task: Task) -> str | None:
    task = Task(task)
    if task is Task.GENDER:
        return record.gender
    if task is Task.EXPRESSION:
        return record.expression
    if task is Task.ETHNICITY:
        return record.ethnicity
    return None if record.age_years is None else age_range_label(record.age_years)


# --------------------------------------------------------------------------
# presets


@dataclass(frozen=True)
class Preset:
    name: str
    n_hidden: int
    n_iterations: int
    learning_rate: float
    texture_size: int
    # PCA retention for non-AAM extractors: count, variance fraction or None (all)
    pca_components: int | float | None = None
    # the cascade's gender head, when it differs from the age head
    gender_hidden: int | None = None
    gender_iterations: int | None = None

    def train_config(self, seed: int = 0, gender: bool = False) -> TrainConfig:
        if gender and self.gender_hidden is not None:
            return TrainConfig(self.gender_hidden, self.gender_iterations, self.learning_rate, seed=seed)
        return TrainConfig(self.n_hidden, self.n_iterations, self.learning_rate, seed=seed)


PRESETS = {
    p.name: p for p in (
        Preset("gender-ck", 500, 5000, 0.01, 200),
        Preset("gender-fgnet", 1000, 6500, 0.01, 350),
        Preset("age-fgnet", 1200, 8000, 0.01, 350, gender_hidden=1000, gender_iterations=6500),
        Preset("expression-ck", 200, 5000, 0.01, 150),
        Preset("ethnicity-mixed", 200, 5000, 0.01, 250),
        # sized for the synthetic corpus on a single core
        Preset("desk", 40, 2000, 1.0, 60, pca_components=15),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise DataError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}") from None


# --------------------------------------------------------------------------
# extractor configuration


@dataclass(frozen=True)
class Preprocessing:
    normalize: bool = True
    equalize: bool = True
    face_rows: int = DEFAULT_FACE_SIZE[0]
    face_cols: int = DEFAULT_FACE_SIZE[1]

    def to_dict(self) -> dict:
        return {"normalize": self.normalize, "equalize": self.equalize,
                "face_rows": self.face_rows, "face_cols": self.face_cols}


AAM_PREPROCESSING = Preprocessing(normalize=False, equalize=False)

DEFAULT_PARAMS = {
    Extractor.GABOR: {"sigma": DEFAULT_SIGMA, "k_max": DEFAULT_K_MAX, "f": DEFAULT_F,
                      "n_scales": 5, "n_orients": 8, "kernel_size": 32,
                      "grid_step": DEFAULT_GRID_STEP},
    Extractor.LBP: {"blocks_rows": 9, "blocks_cols": 9},
    Extractor.WD: {"moments": 8, "levels": 2},
    Extractor.AAM: {"texture_rows": 60, "texture_cols": 60, "variance_keep": 0.98,
                    "scheme": "fgnet68"},
}


@dataclass(frozen=True)
class ExtractorConfig:
    kind: Extractor
    params: tuple  # sorted (key, value) pairs
    preprocessing: Preprocessing

    @classmethod
    def make(cls, kind, params: dict | None = None,
             preprocessing: Preprocessing | None = None) -> "ExtractorConfig":
        try:
            kind = Extractor(kind)
        except ValueError:
            raise DataError(
                f"unknown extractor {kind!r}; valid extractors are {', '.join(EXTRACTOR_TOKENS)}"
            ) from None
        merged = dict(DEFAULT_PARAMS[kind])
        for key, value in (params or {}).items():
            if key not in merged:
                raise DataError(f"unknown {kind.value} parameter {key!r}")
            merged[key] = type(merged[key])(value)
        if preprocessing is None:
            preprocessing = AAM_PREPROCESSING if kind is Extractor.AAM else Preprocessing()
        return cls(kind, tuple(sorted(merged.items())), preprocessing)

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    @property
    def key(self) -> str:
        return json.dumps([self.kind.value, self.params, self.preprocessing.to_dict()])

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": self.param_dict,
                "preprocessing": self.preprocessing.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractorConfig":
        return cls.make(d["kind"], d["params"], Preprocessing(**d["preprocessing"]))


@lru_cache(maxsize=8)
def _gabor_bank(sigma, k_max, f, n_scales, n_orients, kernel_size):
    return build_gabor_bank(sigma, k_max, f, n_scales, n_orients, kernel_size)


@dataclass
class FaceInput:
    """One face to analyse: pixels plus whatever geometry the extractors need."""

    image: np.ndarray
    left_eye: tuple | None = None
    right_eye: tuple | None = None
    landmarks: np.ndarray | None = None
    name: str = ""

    @classmethod
    def from_record(cls, record: DatasetRecord) -> "FaceInput":
        lm = None
        if record.landmarks_path is not None:
            lm = load_landmarks(record.landmarks_path, None).points
        return cls(read_image(record.image_path), record.left_eye, record.right_eye, lm,
                   str(record.image_path))


def preprocess(face: FaceInput, prep: Preprocessing) -> np.ndarray:
    img = as_image(face.image)
    if prep.normalize:
        if face.left_eye is None or face.right_eye is None:
            raise DataError(f"eye coordinates are required for normalisation ({face.name or 'input'})")
        img = normalize_face(img, face.left_eye, face.right_eye, prep.face_rows, prep.face_cols)
    if prep.equalize:
        img = histogram_equalize(img)
    return img


def _landmarks(face: FaceInput, scheme: str) -> LandmarkSet:
    if face.landmarks is None:
        raise DataError(f"landmarks are required for AAM features ({face.name or 'input'})")
    return LandmarkSet(face.landmarks, Scheme.parse(scheme))


def extract_raw(face: FaceInput, config: ExtractorConfig,
                appearance: aam_mod.AppearanceModel | None = None) -> np.ndarray:
    """Feature vector of one face before any PCA stage."""
    p = config.param_dict
    if config.kind is Extractor.AAM:
        if appearance is None:
            raise DataError("AAM extraction needs a fitted appearance model")
        return aam_mod.appearance_params(as_image(face.image), _landmarks(face, p["scheme"]),
                                         appearance).values
    img = preprocess(face, config.preprocessing)
    if config.kind is Extractor.GABOR:
        bank = _gabor_bank(p["sigma"], p["k_max"], p["f"], p["n_scales"], p["n_orients"],
                           p["kernel_size"])
        return gabor_features(img, bank, p["grid_step"]).values
    if config.kind is Extractor.LBP:
        return lbp_block_histograms(img, p["blocks_rows"], p["blocks_cols"]).values
    return wavelet_features(img, daubechies_filters(p["moments"]), p["levels"]).values


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DataError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise DataError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def parallel_map(fn, items) -> list:
    """Ordered map over a thread pool capped by ``FACEPROBE_THREADS``."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# task models


@dataclass
class TaskModel:
    task: Task
    extractor: ExtractorConfig
    mlp: MlpModel
    labels: tuple
    pca: PcaModel | None = None
    appearance: aam_mod.AppearanceModel | None = None

    def __post_init__(self):
        self.task = Task(self.task)
        self.labels = tuple(self.labels)
        if len(self.labels) != self.mlp.n_out:
            raise DataError(f"{len(self.labels)} labels for a network with {self.mlp.n_out} outputs")
        is_aam = self.extractor.kind is Extractor.AAM
        if is_aam != (self.pca is None) or is_aam != (self.appearance is not None):
            raise DataError("AAM models carry an appearance model and no PCA; others the reverse")
        want = TargetScheme.PLUS_MINUS_ONE if is_aam else TargetScheme.ZERO_ONE
        if self.mlp.target_scheme is not want:
            raise DataError(f"{self.extractor.kind.value} models must use {want.value} targets")

    @property
    def extraction_key(self) -> str:
        if self.appearance is not None:
            return f"{self.extractor.key}#{id(self.appearance)}"
        return self.extractor.key

    def extract(self, face: FaceInput) -> np.ndarray:
        return extract_raw(face, self.extractor, self.appearance)

    def reduce(self, raw: np.ndarray) -> np.ndarray:
        return raw if self.pca is None else self.pca.project(raw)

    def decide(self, reduced: np.ndarray) -> tuple[str, np.ndarray]:
        scores = self.mlp.forward(reduced)
        return self.labels[int(np.argmax(scores))], scores

    def predict(self, face: FaceInput) -> tuple[str, np.ndarray]:
        return self.decide(self.reduce(self.extract(face)))


def _faces(records) -> list[FaceInput]:
    return parallel_map(FaceInput.from_record, records)


def train_task(records, task, extractor, cfg: TrainConfig, extractor_params: dict | None = None,
               preprocessing: Preprocessing | None = None, n_components=None,
               faces: list[FaceInput] | None = None) -> TaskModel:
    """Preprocess, extract, reduce (PCA unless AAM), encode targets and train."""
    task = Task(task)
    config = ExtractorConfig.make(extractor, extractor_params, preprocessing)
    records = list(records)
    if not records:
        raise DataError(f"no training records for task {task.value}")
    labels = TASK_LABELS[task]
    y = []
    for k, rec in enumerate(records):
        lab = record_label(rec, task)
        if lab is None:
            raise DataError(f"training record {k} ({rec.image_path}) has no {task.value} label")
        y.append(labels.index(lab))
    if len(set(y)) < 2:
        raise DataError(f"{task.value} training set holds a single class ({labels[y[0]]})")
    if config.kind is Extractor.AAM and any(r.landmarks_path is None for r in records):
        raise DataError("every AAM training record needs a landmarks file")
    if faces is None:
        faces = _faces(records)

    pca = appearance = None
    if config.kind is Extractor.AAM:
        p = config.param_dict
        lms = [_landmarks(f, p["scheme"]) for f in faces]
        appearance, x = aam_mod.build_appearance_model(
            [as_image(f.image) for f in faces], lms,
            (p["texture_rows"], p["texture_cols"]), p["variance_keep"])
        scheme = TargetScheme.PLUS_MINUS_ONE
    else:
        raw = np.array(parallel_map(lambda f: extract_raw(f, config), faces))
        pca = fit_pca(raw, n_components)
        x = pca.project(raw)
        scheme = TargetScheme.ZERO_ONE
    targets = encode_targets(y, len(labels), scheme)
    mlp = train_mlp(x, targets, cfg, scheme)
    return TaskModel(task, config, mlp, labels, pca, appearance)


@dataclass
class AgeCascade:
    """Gender head routing each face to a gender-specific age head."""

    gender: TaskModel
    male: TaskModel
    female: TaskModel

    def route(self, gender_label: str) -> TaskModel:
        return self.male if gender_label == "male" else self.female


def train_age_cascade(records, extractor, cfg_gender: TrainConfig, cfg_age: TrainConfig,
                      extractor_params: dict | None = None, n_components=None) -> AgeCascade:
    """Gender head on all records; age heads on the true-gender partitions."""
    records = list(records)
    for k, rec in enumerate(records):
        if rec.gender is None or rec.age_years is None:
            raise DataError(f"cascade record {k} ({rec.image_path}) needs both gender and age")
    faces = _faces(records)
    gender = train_task(records, Task.GENDER, extractor, cfg_gender, extractor_params,
                        n_components=n_components, faces=faces)
    heads = {}
    for g, task in (("male", Task.AGE_MALE), ("female", Task.AGE_FEMALE)):
        idx = [k for k, r in enumerate(records) if r.gender == g]
        ranges = {age_range_label(records[k].age_years) for k in idx}
        if len(ranges) < 2:
            raise DataError(f"{g} partition has {len(ranges)} age class(es); the cascade needs >= 2")
        heads[g] = train_task([records[k] for k in idx], task, extractor, cfg_age,
                              extractor_params, n_components=n_components,
                              faces=[faces[k] for k in idx])
    return AgeCascade(gender, heads["male"], heads["female"])


# --------------------------------------------------------------------------
# bundles and combined inference


class ModelBundle(dict):
    """Task name to TaskModel."""

    def cascade(self) -> AgeCascade | None:
        if all(k in self for k in ("gender", "age_male", "age_female")):
            return AgeCascade(self["gender"], self["age_male"], self["age_female"])
        return None

    def add_cascade(self, cascade: AgeCascade) -> None:
        self["gender"] = cascade.gender
        self["age_male"] = cascade.male
        self["age_female"] = cascade.female


@dataclass
class HeadResult:
    label: str
    scores: dict


@dataclass
class AttributeReport:
    gender: HeadResult | None = None
    age_range: HeadResult | None = None
    expression: HeadResult | None = None
    ethnicity: HeadResult | None = None
    timings_ms: dict = field(default_factory=dict)
    age_head: str | None = None
    n_extractions: int = 0

    def to_dict(self) -> dict:
        heads = {"gender": self.gender, "age_range": self.age_range,
                 "expression": self.expression, "ethnicity": self.ethnicity}
        out = {k: (v.label if v else None) for k, v in heads.items()}
        out["scores"] = {k: v.scores for k, v in heads.items() if v is not None}
        out["timings_ms"] = dict(self.timings_ms)
        out["age_head"] = self.age_head
        out["n_extractions"] = self.n_extractions
        return out


class _Run:
    """Per-image extraction cache and stage clocks."""

    def __init__(self, face: FaceInput):
        self.face = face
        self.cache: dict = {}
        self.n_extractions = 0
        self.t = {"extraction": 0.0, "projection": 0.0, "classification": 0.0}

    def head(self, model: TaskModel) -> tuple[str, np.ndarray]:
        key = model.extraction_key
        if key not in self.cache:
            t0 = time.perf_counter()
            self.cache[key] = model.extract(self.face)
            self.t["extraction"] += time.perf_counter() - t0
            self.n_extractions += 1
        t0 = time.perf_counter()
        reduced = model.reduce(self.cache[key])
        t1 = time.perf_counter()
        label, scores = model.decide(reduced)
        t2 = time.perf_counter()
        self.t["projection"] += t1 - t0
        self.t["classification"] += t2 - t1
        return label, scores


def _result(model: TaskModel, label, scores) -> HeadResult:
    return HeadResult(label, {lab: float(s) for lab, s in zip(model.labels, scores)})


def predict_all(face: FaceInput, models, heads=REPORT_HEADS, force_gender: str | None = None
                ) -> AttributeReport:
    """All requested attributes from one image, extracting features once per
    distinct extractor configuration. Age uses the cascade when the bundle
    holds both gendered age heads, else the flat age head."""
    models = ModelBundle(models)
    heads = tuple(heads)
    for h in heads:
        if h not in REPORT_HEADS:
            raise DataError(f"unknown head {h!r}; choose from {', '.join(REPORT_HEADS)}")
    cascade = models.cascade()
    for h in heads:
        if h == "age":
            if cascade is None and "age" not in models:
                raise DataError("missing model for head 'age' (need 'age' or gender + age_male + age_female)")
        elif h not in models:
            raise DataError(f"missing model for head {h!r}")

    t_start = time.perf_counter()
    run = _Run(face)
    report = AttributeReport()
    gender_label = None
    if "gender" in heads or ("age" in heads and cascade is not None):
        g = models["gender"]
        gender_label, scores = run.head(g)
        if "gender" in heads:
            report.gender = _result(g, gender_label, scores)
    if "age" in heads:
        if cascade is not None:
            route = force_gender or gender_label
            age_model = cascade.route(route)
            report.age_head = "male" if age_model is cascade.male else "female"
        else:
            age_model = models["age"]
            report.age_head = "flat"
        report.age_range = _result(age_model, *run.head(age_model))
    if "expression" in heads:
        m = models["expression"]
        report.expression = _result(m, *run.head(m))
    if "ethnicity" in heads:
        m = models["ethnicity"]
        report.ethnicity = _result(m, *run.head(m))
    total = time.perf_counter() - t_start
    report.timings_ms = {k: v * 1e3 for k, v in run.t.items()}
    report.timings_ms["total"] = total * 1e3
    report.n_extractions = run.n_extractions
    return report


# --------------------------------------------------------------------------
# evaluation


@dataclass
class EvalResult:
    labels: tuple
    confusion: np.ndarray  # rows true, columns predicted
    predictions: list
    timing_ms: dict  # {"1": ..., "10": ..., "all": ...} cumulative wall time
    stage_ms: dict  # mean and total per stage
    routing: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return 100.0 * float(np.trace(self.confusion)) / self.n

    @property
    def per_class_accuracy(self) -> dict:
        out = {}
        for k, lab in enumerate(self.labels):
            row = self.confusion[k].sum()
            if row:
                out[lab] = 100.0 * float(self.confusion[k, k]) / float(row)
        return out


def evaluate(records, model, force_gender: str | None = None) -> EvalResult:
    """Accuracy, confusion and timings of a TaskModel or AgeCascade.

    Images run in order; the cumulative wall time after the first 1, first
    10 and all images is reported.
    """
    records = list(records)
    if not records:
        raise DataError("test set is empty")
    is_cascade = isinstance(model, AgeCascade)
    task = Task.AGE if is_cascade else model.task
    labels = TASK_LABELS[task]
    truth = []
    for k, rec in enumerate(records):
        lab = record_label(rec, task)
        if lab is None:
            raise DataError(f"test record {k} ({rec.image_path}) has no {task.value} label")
        truth.append(labels.index(lab))

    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    preds = []
    stage = {"load": 0.0, "extraction": 0.0, "projection": 0.0, "classification": 0.0}
    routing = {"male": 0, "female": 0} if is_cascade else {}
    marks = {}
    t0 = time.perf_counter()
    for k, rec in enumerate(records):
        ta = time.perf_counter()
        face = FaceInput.from_record(rec)
        stage["load"] += time.perf_counter() - ta
        run = _Run(face)
        if is_cascade:
            g, _ = run.head(model.gender)
            head = model.route(force_gender or g)
            routing["male" if head is model.male else "female"] += 1
            label, _ = run.head(head)
        else:
            label, _ = run.head(model)
        for s, v in run.t.items():
            stage[s] += v
        preds.append(label)
        conf[truth[k], labels.index(label)] += 1
        done = k + 1
        if done in (1, 10):
            marks[str(done)] = (time.perf_counter() - t0) * 1e3
    marks["all"] = (time.perf_counter() - t0) * 1e3
    n = len(records)
    stage_ms = {s: {"total": v * 1e3, "mean": v * 1e3 / n} for s, v in stage.items()}
    return EvalResult(tuple(labels), conf, preds, marks, stage_ms, routing)


def eval_csv(result: EvalResult) -> str:
    lines = ["metric,value", f"n_images,{result.n}", f"accuracy,{result.accuracy!r}"]
    for lab, acc in result.per_class_accuracy.items():
        lines.append(f"accuracy[{lab}],{acc!r}")
    for key in ("1", "10", "all"):
        if key in result.timing_ms:
            lines.append(f"time_ms[{key}],{result.timing_ms[key]!r}")
    for s, v in result.stage_ms.items():
        lines.append(f"stage_ms_mean[{s}],{v['mean']!r}")
    for route, count in result.routing.items():
        lines.append(f"routed[{route}],{count}")
    lines.append("")
    lines.append("confusion," + ",".join(result.labels))
    for lab, row in zip(result.labels, result.confusion):
        lines.append(lab + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def eval_summary(result: EvalResult) -> str:
    out = [f"accuracy: {result.accuracy:.2f}% on {result.n} images"]
    for lab, acc in result.per_class_accuracy.items():
        out.append(f"  {lab:>10}: {acc:6.2f}%")
    if result.routing:
        out.append("routing: " + ", ".join(f"{k}={v}" for k, v in result.routing.items()))
    out.append(timing_table(result))
    return "\n".join(out)


def timing_table(result: EvalResult) -> str:
    rows = ["images      total ms   ms/image"]
    n_for = {"1": 1, "10": 10, "all": result.n}
    for key in ("1", "10", "all"):
        if key in result.timing_ms:
            ms = result.timing_ms[key]
            rows.append(f"{key:>6} {ms:14.2f} {ms / n_for[key]:10.2f}")
    return "\n".join(rows)


def benchmark(records, models, heads=REPORT_HEADS) -> list[dict]:
    """Combined prediction over the first 1, 10 and all records.

    Each row holds cumulative wall time (image load included) and the
    per-stage totals from the attribute reports.
    """
    records = list(records)
    if not records:
        raise DataError("benchmark needs at least one record")
    marks = sorted({m for m in (1, 10, len(records)) if m <= len(records)})
    rows = []
    stages = {"extraction": 0.0, "projection": 0.0, "classification": 0.0, "total": 0.0}
    t0 = time.perf_counter()
    for k, rec in enumerate(records, start=1):
        report = predict_all(FaceInput.from_record(rec), models, heads)
        for s in stages:
            stages[s] += report.timings_ms[s]
        if k in marks:
            wall = (time.perf_counter() - t0) * 1e3
            rows.append({"images": k, "wall_ms": wall, "per_image_ms": wall / k,
                         **{f"{s}_ms": v for s, v in stages.items()}})
    return rows


def benchmark_table(rows: list[dict]) -> str:
    head = f"{'images':>6} {'wall ms':>12} {'ms/image':>10} {'extract':>10} {'project':>10} {'classify':>10}"
    out = [head]
    for r in rows:
        out.append(f"{r['images']:>6} {r['wall_ms']:12.2f} {r['per_image_ms']:10.2f} "
                   f"{r['extraction_ms']:10.2f} {r['projection_ms']:10.2f} {r['classification_ms']:10.2f}")
    return "\n".join(out)
