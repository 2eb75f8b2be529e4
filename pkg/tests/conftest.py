import os

import numpy as np
import pytest

from monitor.iqa.nss import luminance

ACCEPTANCE_LINES: list[str] = []


def record(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" :: {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


_PHOTO_NAMES = ("astronaut", "camera", "chelsea", "coffee", "coins", "rocket", "brick", "grass",
                "gravel", "moon", "retina", "hubble_deep_field")


@pytest.fixture(scope="session")
def photos() -> dict:
    """Real photographs shipped with scikit-image and scikit-learn, as gray float images."""
    skd = pytest.importorskip("skimage.data")
    skio = pytest.importorskip("skimage.io")
    import skimage

    out = {}
    for name in _PHOTO_NAMES:
        try:
            out[name] = luminance(getattr(skd, name)())
        except Exception:  # dataset not available offline
            continue
    moto = os.path.join(os.path.dirname(skimage.__file__), "data", "motorcycle_left.png")
    if os.path.exists(moto):
        out["motorcycle"] = luminance(skio.imread(moto))
    try:
        from sklearn.datasets import load_sample_images

        for i, im in enumerate(load_sample_images().images):
            out[f"sample{i}"] = luminance(im)
    except Exception:
        pass
    if len(out) < 10:
        pytest.skip(f"only {len(out)} test photos available")
    return out


@pytest.fixture(scope="session")
def iqa_models():
    from monitor.iqa import load_default_models

    return load_default_models()


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    from monitor.corpora import make_synthetic_corpus

    return make_synthetic_corpus(tmp_path_factory.mktemp("synthetic"), n_events=100, posts_per_event=4, seed=0)


@pytest.fixture(scope="session")
def synthetic_features(synthetic_corpus):
    from monitor.eval import load_features

    return load_features(synthetic_corpus)


@pytest.fixture(scope="session")
def toy_path():
    from monitor.corpora import toy_corpus_path

    return toy_corpus_path()


@pytest.fixture(scope="session")
def toy_features(toy_path):
    from monitor.eval import load_features

    return load_features(toy_path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
