import json

import numpy as np
import pytest

from faceprobe import synth
from faceprobe.aam import EYE_GROUPS
from faceprobe.dataset import load_landmarks, load_manifest, read_image
from faceprobe.errors import DataError
from faceprobe.synth import CorpusSpec, generate_synthetic_corpus, load_corpus_spec

SMALL = CorpusSpec(n_train=6, n_test=3)


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_seed_stable(tmp_path):
    generate_synthetic_corpus(SMALL, 4, tmp_path / "a")
    generate_synthetic_corpus(SMALL, 4, tmp_path / "b")
    generate_synthetic_corpus(SMALL, 5, tmp_path / "c")
    a, b, c = (tree_bytes(tmp_path / n) for n in "abc")
    assert a == b
    assert a["images/train_0000.png"] != c["images/train_0000.png"]


def test_layout_and_manifests(tmp_path):
    splits = generate_synthetic_corpus(SMALL, 1, tmp_path)
    assert len(splits["train"]) == 6 and len(splits["test"]) == 3
    recs = load_manifest(tmp_path / "train.csv")
    assert recs == splits["train"]
    img = read_image(recs[0].image_path)
    assert img.shape == (128, 128)
    meta = json.loads((tmp_path / "corpus.json").read_text())
    assert meta["seed"] == 1 and meta["n_train"] == 6


def test_default_spec_counts():
    spec = CorpusSpec()
    assert (spec.n_train, spec.n_test) == (400, 200)


def test_landmarks_match_eyes(tmp_path):
    splits = generate_synthetic_corpus(SMALL, 2, tmp_path)
    left, right = EYE_GROUPS["FGNET68"]
    for rec in splits["train"]:
        pts = load_landmarks(rec.landmarks_path).points
        assert pts.shape == (68, 2)
        np.testing.assert_allclose(pts[list(left)].mean(0), rec.left_eye, atol=2.0)
        np.testing.assert_allclose(pts[list(right)].mean(0), rec.right_eye, atol=2.0)


def test_spec_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"n_train": 10, "gender_strength": 0.0,
                                "expressions": ["happy", "sad"]}))
    spec = load_corpus_spec(path)
    assert spec.n_train == 10 and spec.gender_strength == 0.0
    assert spec.expressions == ["happy", "sad"]


@pytest.mark.parametrize("bad", [{"n_train": 0}, {"genders": ["robot"]}, {"max_age": 80},
                                 {"image_size": [32, 32]}, {"colour": 1}])
def test_spec_errors(tmp_path, bad):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(DataError):
        load_corpus_spec(path)


def test_spec_not_json(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text("n_train = 3")
    with pytest.raises(DataError, match="JSON"):
        load_corpus_spec(path)


def draws(spec, n=400, seed=0):
    rng = np.random.default_rng(seed)
    return [synth._draw_params(rng, spec) for _ in range(n)]


def test_gender_cue_separates_aspect():
    ps = draws(CorpusSpec())
    male = [p.aspect for p in ps if p.gender == "male"]
    female = [p.aspect for p in ps if p.gender == "female"]
    assert max(male) < min(female)


def test_zero_cues_remove_label_dependence():
    spec = CorpusSpec(gender_strength=0, age_strength=0, expression_strength=0,
                      ethnicity_strength=0)
    ps = draws(spec)
    assert np.ptp([p.wrinkle_freq for p in ps]) == 0
    for attr, key in (("aspect", "gender"), ("sag", "expression"), ("skin", "ethnicity")):
        groups = {}
        for p in ps:
            groups.setdefault(getattr(p, key), []).append(getattr(p, attr))
        means = [np.mean(v) for v in groups.values()]
        spread = np.std([getattr(p, attr) for p in ps])
        assert np.ptp(means) < spread


def test_gender_dependent_aging():
    ps = draws(CorpusSpec(gender_dependent_aging=1.0))
    female = [p for p in ps if p.gender == "female"]
    male = [p for p in ps if p.gender == "male"]
    assert np.ptp([p.wrinkle_freq for p in female]) == 0
    assert np.corrcoef([p.age for p in female], [p.wrinkle_amp for p in female])[0, 1] > 0.99
    assert np.corrcoef([p.age for p in male], [p.wrinkle_freq for p in male])[0, 1] > 0.99
    assert np.ptp([p.wrinkle_amp for p in male]) == 0
