"""Acceptance criteria, one recorded pass/fail line each.

Run directly (``python3 tests/test_acceptance.py``) or as part of ``pytest``.
The lines are repeated in the "acceptance criteria" section of the summary.
"""
import contextlib
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record
from oracles import gain_ratio_bruteforce

from monitor.cli import main as cli_main
from monitor.corpus import Label
from monitor.eval import RunConfig, cross_validate, f1_consistent, metrics, run_pipeline
from monitor.features import FeatureSet
from monitor.fuse import IMAGE_COLUMNS, FeatureMatrix, gain_ratio
from monitor.iqa import brisque_score, mvg_distance, niqe_score, piqe_score
from monitor.iqa.nss import fit_aggd, fit_ggd
from monitor.learn import KINDS, ModelSpec
from monitor.synth import add_noise
from monitor.textfeat import flesch_reading_ease


@contextlib.contextmanager
def criterion(name):
    """Record a FAIL line if the body raises before it records its own result."""
    state = {"done": False}

    def rec(ok, detail=""):
        state["done"] = True
        record(name, ok, detail)
        return ok

    try:
        yield rec
    except BaseException as exc:
        if not state["done"]:
            record(name, False, f"{type(exc).__name__}: {exc}")
        raise


# ---------------------------------------------------------------- 1


def test_estimator_recovery():
    with criterion("estimator recovery") as rec:
        t0 = time.perf_counter()
        rng = np.random.default_rng(0)
        g = fit_ggd(rng.normal(0.0, 1.0, 100_000))
        x = np.abs(rng.normal(0.0, 1.0, 100_000))
        side = rng.uniform(size=x.size) < 1 / 3  # mass 1/3 left, 2/3 right for sigma_r = 2 sigma_l
        a = fit_aggd(np.where(side, -x, 2.0 * x))
        ratio = a.sigma_r_sq / a.sigma_l_sq
        dt = time.perf_counter() - t0
        ok = 1.9 <= g.alpha <= 2.1 and abs(g.sigma_sq - 1.0) <= 0.05 and abs(ratio - 4.0) <= 0.4 and dt < 5
        rec(ok, f"ggd alpha={g.alpha:.3f} var={g.sigma_sq:.4f}; aggd var ratio={ratio:.3f} (target 4); {dt:.2f}s")
    assert ok


# ---------------------------------------------------------------- 2


def test_distortion_monotonicity(photos, iqa_models):
    with criterion("distortion monotonicity") as rec:
        t0 = time.perf_counter()
        wins = {"brisque": 0, "niqe": 0, "piqe": 0}
        joint = 0
        scorers = {
            "brisque": lambda g: brisque_score(g, iqa_models.brisque),
            "niqe": lambda g: niqe_score(g, iqa_models.niqe),
            "piqe": piqe_score,
        }
        for i, g in enumerate(photos.values()):
            noisy = add_noise(g, 25.0, seed=i)  # sigma 25/255 on the unit scale
            res = {k: s(noisy) > s(g) for k, s in scorers.items()}
            for k, v in res.items():
                wins[k] += v
            joint += all(res.values())
        n = len(photos)
        dt = time.perf_counter() - t0
        ok = n >= 10 and all(w >= 0.9 * n for w in wins.values()) and dt < 120
        per = ", ".join(f"{k} {w}/{n}" for k, w in wins.items())
        rec(ok, f"{per}; all three on the same photo {joint}/{n}; {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 3


def test_niqe_identity(iqa_models):
    with criterion("NIQE identity") as rec:
        m = iqa_models.niqe
        d = mvg_distance(m.mean, m.cov, m.mean, m.cov)
        ok = abs(d) <= 1e-6
        rec(ok, f"distance={d:.3g}")
    assert ok


# ---------------------------------------------------------------- 4


def test_gain_ratio_oracle():
    with criterion("gain ratio vs brute-force entropy") as rec:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(20):
            n = int(rng.integers(8, 17))
            xs = list(rng.integers(0, int(rng.integers(2, 5)), n))
            ys = list(rng.integers(0, 2, n))
            worst = max(worst, abs(gain_ratio(xs, ys) - gain_ratio_bruteforce(xs, ys)))
        y = [0, 1] * 6
        perfect = gain_ratio(y, y)
        const = gain_ratio([3] * 12, y)
        ok = worst <= 1e-12 and abs(perfect - 1.0) <= 1e-12 and const == 0.0
        rec(ok, f"max |diff| over 20 tables={worst:.2e}; perfect={perfect!r}; constant={const!r}")
    assert ok


# ---------------------------------------------------------------- 5


def test_flesch():
    with criterion("Flesch reading ease") as rec:
        cat = flesch_reading_ease("The cat sat on the mat.")
        hard = flesch_reading_ease("Incomprehensibility characterizes institutionalized bureaucratic "
                                   "communication notwithstanding considerable deliberation.")
        ok = cat == 100.0 and hard < cat
        rec(ok, f"cat={cat!r}; polysyllabic={hard:.3f}")
    assert ok


# ---------------------------------------------------------------- 6 and 7 (shared corpus)


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    """The synthetic multimodal corpus, generated and extracted with timing."""
    from monitor.corpora import make_synthetic_corpus
    from monitor.eval import load_features

    t0 = time.perf_counter()
    path = make_synthetic_corpus(tmp_path_factory.mktemp("planted"), n_events=100, posts_per_event=4, seed=0)
    fs = load_features(path)
    return fs, time.perf_counter() - t0


def test_fusion_beats_single_modality(planted, tmp_path):
    with criterion("fusion beats single modality") as rec:
        fs, t_prep = planted
        t0 = time.perf_counter()
        cfg = RunConfig(tmp_path / "unused", tmp_path / "out", models=("forest",), protocols=("cv",))
        rep = run_pipeline(cfg, fs)
        acc = {fset: rep.cells[("cv", fset, "forest")].pooled.accuracy for fset in ("textual", "image", "monitor")}
        mean = {fset: rep.cells[("cv", fset, "forest")].mean["accuracy"] for fset in acc}
        dt = t_prep + time.perf_counter() - t0
        margin = acc["monitor"] - max(acc["textual"], acc["image"])
        ok = len(fs.row_ids) >= 400 and margin >= 0.05 and dt < 180
        rec(ok, f"n={len(fs.row_ids)}; accuracy monitor={acc['monitor']:.3f} textual={acc['textual']:.3f} "
                f"image={acc['image']:.3f} (fold means {mean['monitor']:.3f}/{mean['textual']:.3f}/"
                f"{mean['image']:.3f}); margin={margin:+.3f}; {dt:.1f}s")
    assert ok


def separable_feature_set(n_events=60, per_event=4, seed=0):
    """Labels from a linear rule over one textual and one image column, with a margin."""
    rng = np.random.default_rng(seed)
    rows, events, labels = [], [], []
    t_sig, i_sig = [], []
    for e in range(n_events):
        fake = e % 2
        for j in range(per_event):
            # points either side of t + i = 1, at least 0.3 away from it
            a = rng.uniform(0.3, 1.0) if fake else rng.uniform(0.0, 0.7)
            off = rng.uniform(0.3, 0.8) * (1 if fake else -1)
            t_sig.append(a)
            i_sig.append(1.0 - a + off)
            rows.append(f"e{e}p{j}")
            events.append(f"e{e}")
            labels.append(Label.FAKE if fake else Label.REAL)
    n = len(rows)
    t = np.column_stack([t_sig, rng.normal(size=n), rng.uniform(size=n)])
    img = np.column_stack([i_sig] + [rng.normal(size=n) for _ in range(6)])
    T = FeatureMatrix(("t_signal", "t_noise", "t_unif"), t, np.zeros(t.shape, bool), tuple(rows))
    I = FeatureMatrix(IMAGE_COLUMNS, img, np.zeros(img.shape, bool), tuple(rows))
    return FeatureSet(T, I, tuple(labels), tuple(events), (None,) * n)


def test_classifier_sanity(planted, tmp_path):
    with criterion("classifier sanity") as rec:
        fs = separable_feature_set()
        accs = {}
        for kind in KINDS:
            rep = cross_validate(ModelSpec(kind, {"seed": 0} if kind in ("forest", "svm") else {}), fs, "monitor", 5, 0)
            accs[kind] = rep.mean["accuracy"]
        pfs, _ = planted
        cfg = RunConfig(tmp_path / "unused", tmp_path / "out", models=("forest",), feature_sets=("monitor",),
                        protocols=())
        top = [name for name, _ in run_pipeline(cfg, pfs).importances[:3]]
        planted_ok = "n_exclammark" in top and bool({"brisque", "niqe", "piqe"} & set(top))
        ok = all(a >= 0.95 for a in accs.values()) and planted_ok
        rec(ok, "cv accuracy " + " ".join(f"{k}={v:.3f}" for k, v in accs.items()) + f"; forest top-3 {top}")
    assert ok


# ---------------------------------------------------------------- 8


def test_pipeline_determinism(toy_path, tmp_path):
    with criterion("pipeline determinism") as rec:
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run
            code = cli_main(["evaluate", "--dataset", str(toy_path), "--seed", "3", "--out", str(out)])
            assert code == 0
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        same = [n for n in names if (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()]
        ok = names == sorted(p.name for p in outs[1].iterdir()) and same == names and "grid.tsv" in names
        rec(ok, f"{len(same)}/{len(names)} report files byte-identical")
    assert ok


# ---------------------------------------------------------------- 9


def _read_tsv(path: Path) -> list[dict]:
    lines = path.read_text().splitlines()
    head = lines[0].split("\t")
    return [dict(zip(head, ln.split("\t"))) for ln in lines[1:]]


def test_end_to_end_smoke(toy_path, tmp_path):
    with criterion("end-to-end toy smoke") as rec:
        t0 = time.perf_counter()
        feats, sel, ev = tmp_path / "feats", tmp_path / "selection.tsv", tmp_path / "eval"
        codes = [
            cli_main(["extract", "--dataset", str(toy_path), "--out", str(feats)]),
            cli_main(["select", "--dataset", str(feats), "--out", str(sel)]),
            cli_main(["evaluate", "--dataset", str(feats), "--out", str(ev)]),
        ]
        dt = time.perf_counter() - t0
        grid = _read_tsv(ev / "grid.tsv")
        shape = {(r["protocol"], r["features"], r["model"]) for r in grid}
        want = {(p, f, m) for p in ("cv", "holdout") for f in ("textual", "image", "monitor") for m in KINDS}
        finite = all(math.isfinite(float(r[k])) for r in grid for k in ("accuracy", "precision", "recall", "f1"))
        identity = True
        for r in grid:
            tp, fp, tn, fn = (int(r[k]) for k in ("tp", "fp", "tn", "fn"))
            rep = metrics([1] * tp + [0] * fp + [0] * tn + [1] * fn, [1] * tp + [1] * fp + [0] * tn + [0] * fn)
            identity &= f1_consistent(rep) and abs(rep.f1 - float(r["f1"])) <= 5e-7
            p, q, f = float(r["precision"]), float(r["recall"]), float(r["f1"])
            identity &= (f == 0.0) if p + q == 0 else abs(f - 2 * p * q / (p + q)) <= 5e-6
        ok = codes == [0, 0, 0] and shape == want and finite and identity and dt < 60
        rec(ok, f"exit codes {codes}; {len(grid)} cells (want {len(want)}); finite={finite}; "
                f"f1 identity={identity}; {dt:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s", "-p", "no:cacheprovider"]))
