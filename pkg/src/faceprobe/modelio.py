"""Conversion of trained models to and from ``FPRB`` bundle files."""

from __future__ import annotations

import numpy as np

from . import aam as aam_mod
from . import serialize
from .errors import ModelFormatError
from .mlp import MlpModel, TargetScheme
from .pca import PcaModel
from .pipeline import AgeCascade, ExtractorConfig, ModelBundle, Task, TaskModel

BUNDLE_KIND = "faceprobe-models"


def _pca_to(p: PcaModel) -> dict:
    return {"mean": p.mean, "components": p.components, "eigenvalues": p.eigenvalues,
            "total_variance": p.total_variance}


def _pca_from(d: dict) -> PcaModel:
    return PcaModel(d["mean"], d["components"], d["eigenvalues"], d["total_variance"])


def _mlp_to(m: MlpModel) -> dict:
    return {"w1": m.w1, "b1": m.b1, "w2": m.w2, "b2": m.b2,
            "target_scheme": m.target_scheme.value,
            "scaler_mean": m.scaler_mean, "scaler_std": m.scaler_std,
            "train_mse": m.train_mse, "initial_mse": m.initial_mse,
            "train_iterations": m.train_iterations}


def _mlp_from(d: dict) -> MlpModel:
    return MlpModel(d["w1"], d["b1"], d["w2"], d["b2"], TargetScheme(d["target_scheme"]),
                    d["scaler_mean"], d["scaler_std"], d["train_mse"], d["initial_mse"],
                    d["train_iterations"])


def _aam_to(a: aam_mod.AppearanceModel) -> dict:
    s, t = a.shape, a.texture
    return {
        "shape": {"pca": _pca_to(s.pca), "reference": s.reference, "n_points": s.n_points,
                  "scheme": s.scheme},
        "texture": {"pca": _pca_to(t.pca), "reference": t.reference,
                    "frame": {"points": t.frame.points, "triangles": t.frame.triangles,
                              "rows": t.frame.rows, "cols": t.frame.cols}},
        "w_s": a.w_s,
        "pca": _pca_to(a.pca),
    }


def _aam_from(d: dict) -> aam_mod.AppearanceModel:
    s, t = d["shape"], d["texture"]
    shape = aam_mod.ShapeModel(_pca_from(s["pca"]), s["reference"], s["n_points"], s["scheme"])
    f = t["frame"]
    frame = aam_mod.TextureFrame(f["points"], f["triangles"].astype(np.intp), f["rows"], f["cols"])
    texture = aam_mod.TextureModel(_pca_from(t["pca"]), t["reference"], frame)
    return aam_mod.AppearanceModel(shape, texture, d["w_s"], _pca_from(d["pca"]))


def task_model_to_dict(m: TaskModel) -> dict:
    return {
        "task": m.task.value,
        "labels": list(m.labels),
        "extractor": m.extractor.to_dict(),
        "pca": None if m.pca is None else _pca_to(m.pca),
        "appearance": None if m.appearance is None else _aam_to(m.appearance),
        "mlp": _mlp_to(m.mlp),
    }


def task_model_from_dict(d: dict) -> TaskModel:
    return TaskModel(
        Task(d["task"]), ExtractorConfig.from_dict(d["extractor"]), _mlp_from(d["mlp"]),
        tuple(d["labels"]),
        None if d["pca"] is None else _pca_from(d["pca"]),
        None if d["appearance"] is None else _aam_from(d["appearance"]),
    )


def bundle_to_dict(models) -> dict:
    models = dict(models)
    order = [t.value for t in Task if t.value in models]
    for name, m in models.items():
        if name != m.task.value:
            raise ModelFormatError(f"head {name!r} holds a {m.task.value} model")
    return {"kind": BUNDLE_KIND,
            "heads": {name: task_model_to_dict(models[name]) for name in order}}


def bundle_from_dict(d: dict) -> ModelBundle:
    if not isinstance(d, dict) or d.get("kind") != BUNDLE_KIND:
        raise ModelFormatError("file does not hold a faceprobe model bundle")
    out = ModelBundle()
    try:
        for name, md in d["heads"].items():
            m = task_model_from_dict(md)
            if m.task.value != name:
                raise ModelFormatError(f"head {name!r} holds a {m.task.value} model")
            out[name] = m
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model bundle: {exc}") from None
    return out


def save_models(path, models) -> None:
    """Write a bundle atomically. ``models`` maps task name to TaskModel, or is
    a single TaskModel or AgeCascade."""
    if isinstance(models, TaskModel):
        models = {models.task.value: models}
    elif isinstance(models, AgeCascade):
        b = ModelBundle()
        b.add_cascade(models)
        models = b
    serialize.save(path, bundle_to_dict(models))


def load_models(path) -> ModelBundle:
    return bundle_from_dict(serialize.load(path))


def load_task_model(path, task) -> TaskModel:
    """Load one head, failing if the file does not hold a model for ``task``."""
    task = Task(task)
    bundle = load_models(path)
    if task.value not in bundle:
        held = ", ".join(bundle) or "nothing"
        raise ModelFormatError(f"task mismatch: expected a {task.value} model, file holds {held}")
    return bundle[task.value]


def merge_bundles(paths) -> ModelBundle:
    out = ModelBundle()
    for p in paths:
        out.update(load_models(p))
    return out
