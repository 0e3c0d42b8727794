import numpy as np
import pytest

from faceprobe.synth import CorpusSpec, generate_synthetic_corpus

CRITERIA: dict[int, list] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    CRITERIA.setdefault(number, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(CRITERIA):
        checks = CRITERIA[number]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        detail = "; ".join(f"{'ok' if ok else 'FAILED'}: {d}" for ok, d in checks)
        tr.write_line(f"criterion {number:>2}: {status}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """60 train / 30 test synthetic faces, shared by the pipeline tests."""
    out = tmp_path_factory.mktemp("small_corpus")
    splits = generate_synthetic_corpus(CorpusSpec(n_train=60, n_test=30), 5, out)
    return out, splits


@pytest.fixture(scope="session")
def aam_faces(tmp_path_factory):
    """50 annotated synthetic faces as (images, landmark sets)."""
    from faceprobe.dataset import load_landmarks, read_image

    out = tmp_path_factory.mktemp("aam_corpus")
    splits = generate_synthetic_corpus(CorpusSpec(n_train=50, n_test=0), 21, out)
    recs = splits["train"]
    images = [read_image(r.image_path) for r in recs]
    landmarks = [load_landmarks(r.landmarks_path) for r in recs]
    return images, landmarks
