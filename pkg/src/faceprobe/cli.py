"""Command-line driver.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import aam as aam_mod
from . import pipeline as P
from .dataset import load_landmarks, load_manifest, read_image, write_image
from .errors import DataError, NumericError
from .modelio import load_models, merge_bundles, save_models
from .mlp import TrainConfig
from .serialize import write_atomic
from .synth import CorpusSpec, generate_synthetic_corpus, load_corpus_spec

log = logging.getLogger("faceprobe")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
TRAIN_TASKS = ("gender", "age", "age-cascade", "expression", "ethnicity")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _eyes(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--eyes expects x1,y1,x2,y2 numbers, got {text!r}") from None
    if len(vals) != 4:
        raise UsageError(f"--eyes expects 4 comma-separated numbers, got {len(vals)}")
    return (vals[0], vals[1]), (vals[2], vals[3])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="faceprobe", description="Facial attribute feature extraction and classification.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="render a synthetic annotated corpus")
    s.add_argument("--spec", help="corpus spec (JSON); defaults apply when omitted")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="train a task model")
    t.add_argument("--manifest", required=True)
    t.add_argument("--task", required=True, choices=TRAIN_TASKS)
    t.add_argument("--extractor", required=True, choices=P.EXTRACTOR_TOKENS)
    t.add_argument("--preset", default="desk", choices=tuple(P.PRESETS))
    t.add_argument("--hidden", type=int, help="hidden nodes (overrides the preset)")
    t.add_argument("--iters", type=int, help="training iterations (overrides the preset)")
    t.add_argument("--lr", type=float, help="learning rate (overrides the preset)")
    t.add_argument("--pca", type=float, help="PCA retention: count (>= 1) or variance fraction (< 1)")
    t.add_argument("--texture-size", type=int, help="AAM texture frame side in pixels")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--append", action="store_true",
                   help="add the trained heads to an existing bundle at --out")
    t.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="all attributes of one image")
    p.add_argument("--models", required=True, nargs="+")
    p.add_argument("--image", required=True)
    p.add_argument("--eyes", type=_eyes, help="x1,y1,x2,y2 (left eye, right eye)")
    p.add_argument("--landmarks", help="points file (AAM heads)")
    p.add_argument("--heads", help="comma-separated subset of gender,age,expression,ethnicity; "
                                   "default: every head the bundle supports")
    p.add_argument("--json", action="store_true", help="emit one JSON object")

    e = sub.add_parser("evaluate", help="accuracy, confusion and timing on a labelled set")
    e.add_argument("--models", required=True, nargs="+")
    e.add_argument("--manifest", required=True)
    e.add_argument("--task", choices=TRAIN_TASKS, help="head to evaluate when the bundle holds several")
    e.add_argument("--report", help="CSV report path")

    b = sub.add_parser("benchmark", help="1/10/all-image timing of combined prediction")
    b.add_argument("--models", required=True, nargs="+")
    b.add_argument("--manifest", required=True)
    b.add_argument("--heads", help="comma-separated heads; default: every head the bundle supports")

    i = sub.add_parser("inspect-aam", help="render one appearance mode at -3, 0, +3 standard deviations")
    i.add_argument("--models", required=True)
    i.add_argument("--mode", required=True, type=int)
    i.add_argument("--task", choices=TRAIN_TASKS, help="AAM head to inspect when several exist")
    i.add_argument("--out", required=True)
    return ap


# --------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    spec = load_corpus_spec(args.spec) if args.spec else CorpusSpec()
    splits = generate_synthetic_corpus(spec, args.seed, args.out)
    print(f"wrote {len(splits['train'])} train and {len(splits['test'])} test images to {args.out}")
    return EXIT_OK


def _pca_arg(value):
    if value is None:
        return None
    if value >= 1:
        if value != int(value):
            raise UsageError("--pca counts must be whole numbers")
        return int(value)
    if value <= 0:
        raise UsageError("--pca must be positive")
    return float(value)


def cmd_train(args) -> int:
    preset = P.get_preset(args.preset)
    n_components = _pca_arg(args.pca) if args.pca is not None else preset.pca_components
    texture = args.texture_size or preset.texture_size
    if texture < 8:
        raise UsageError("--texture-size must be >= 8")

    def config(gender: bool) -> TrainConfig:
        base = preset.train_config(args.seed, gender)
        return TrainConfig(args.hidden or base.n_hidden, args.iters or base.n_iterations,
                           base.learning_rate if args.lr is None else args.lr, seed=args.seed)

    params = {"texture_rows": texture, "texture_cols": texture} if args.extractor == "aam" else None
    records = load_manifest(args.manifest)
    bundle = load_models(args.out) if args.append and Path(args.out).exists() else P.ModelBundle()
    if args.task == "age-cascade":
        cascade = P.train_age_cascade(records, args.extractor, config(True), config(False),
                                      params, n_components)
        bundle.add_cascade(cascade)
        trained = [cascade.gender, cascade.male, cascade.female]
    else:
        model = P.train_task(records, args.task, args.extractor, config(args.task == "gender"),
                             params, n_components=n_components)
        bundle[model.task.value] = model
        trained = [model]
    save_models(args.out, bundle)
    for m in trained:
        print(f"{m.task.value}: {m.extractor.kind.value}, {m.mlp.n_in} inputs, "
              f"{m.mlp.n_hidden} hidden, train MSE {m.mlp.train_mse:.6g} "
              f"after {m.mlp.train_iterations} iterations")
    print(f"saved {', '.join(bundle)} to {args.out}")
    return EXIT_OK


def _heads(text: str) -> tuple:
    heads = tuple(h.strip() for h in text.split(",") if h.strip())
    bad = [h for h in heads if h not in P.REPORT_HEADS]
    if bad or not heads:
        raise UsageError(f"--heads must name some of {', '.join(P.REPORT_HEADS)}")
    return heads


def _format_report(report: P.AttributeReport) -> str:
    lines = []
    for name, res in (("gender", report.gender), ("age range", report.age_range),
                      ("expression", report.expression), ("ethnicity", report.ethnicity)):
        if res is not None:
            lines.append(f"{name:>10}: {res.label}")
    t = report.timings_ms
    lines.append("timings ms: " + ", ".join(f"{k} {v:.2f}" for k, v in t.items()))
    return "\n".join(lines)


def _bundle_heads(bundle: P.ModelBundle, text: str | None) -> tuple:
    if text:
        return _heads(text)
    heads = tuple(h for h in P.REPORT_HEADS
                  if h in bundle or (h == "age" and bundle.cascade() is not None))
    if not heads:
        raise DataError("bundle holds no usable heads")
    return heads


def cmd_predict(args) -> int:
    bundle = merge_bundles(args.models)
    heads = _bundle_heads(bundle, args.heads)
    left, right = args.eyes if args.eyes else (None, None)
    lm = load_landmarks(args.landmarks, None).points if args.landmarks else None
    face = P.FaceInput(read_image(args.image), left, right, lm, args.image)
    report = P.predict_all(face, bundle, heads)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(_format_report(report))
    return EXIT_OK


def _select(bundle: P.ModelBundle, task: str | None):
    if task == "age-cascade" or (task == "age" and "age" not in bundle and bundle.cascade()):
        cascade = bundle.cascade()
        if cascade is None:
            raise DataError("bundle has no age cascade (needs gender, age_male and age_female)")
        return cascade
    if task is not None:
        if task not in bundle:
            raise DataError(f"bundle has no {task} model; it holds {', '.join(bundle) or 'nothing'}")
        return bundle[task]
    if len(bundle) == 1:
        return next(iter(bundle.values()))
    if set(bundle) == {"gender", "age_male", "age_female"}:
        return bundle.cascade()
    raise UsageError(f"bundle holds {', '.join(bundle)}; choose one with --task")


def cmd_evaluate(args) -> int:
    bundle = merge_bundles(args.models)
    model = _select(bundle, args.task)
    records = load_manifest(args.manifest)
    result = P.evaluate(records, model)
    print(P.eval_summary(result))
    if args.report:
        write_atomic(args.report, P.eval_csv(result).encode("utf-8"))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    bundle = merge_bundles(args.models)
    heads = _bundle_heads(bundle, args.heads)
    records = load_manifest(args.manifest)
    if not records:
        raise DataError("manifest is empty")
    rows = P.benchmark(records, bundle, heads)
    print(f"heads: {', '.join(heads)}")
    print(P.benchmark_table(rows))
    return EXIT_OK


def cmd_inspect_aam(args) -> int:
    bundle = load_models(args.models)
    candidates = {k: m for k, m in bundle.items() if m.appearance is not None}
    if args.task:
        key = "gender" if args.task == "age-cascade" else args.task
        if key not in candidates:
            raise DataError(f"bundle has no AAM {key} model")
        model = candidates[key]
    elif candidates:
        model = next(iter(candidates.values()))
    else:
        raise DataError("bundle holds no AAM model")
    app = model.appearance
    if not 0 <= args.mode < app.n_appearance_params:
        raise DataError(f"mode {args.mode} out of range; model has {app.n_appearance_params} modes")
    sd = np.sqrt(app.eigenvalues[args.mode])
    images = []
    for k in (-3.0, 0.0, 3.0):
        c = np.zeros(app.n_appearance_params)
        c[args.mode] = k * sd
        images.append(aam_mod.render_image(app, c, background=np.nan))
    stack = np.array(images)
    lo, hi = np.nanmin(stack), np.nanmax(stack)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, img in zip(("minus3", "mean", "plus3"), images):
        scaled = np.where(np.isnan(img), 0.0, (img - lo) / max(hi - lo, 1e-12) * 255.0)
        path = out / f"mode{args.mode}_{k}.png"
        write_image(path, scaled)
        print(path)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth, "train": cmd_train, "predict": cmd_predict, "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark, "inspect-aam": cmd_inspect_aam,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"faceprobe {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"faceprobe {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"faceprobe {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"faceprobe {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
