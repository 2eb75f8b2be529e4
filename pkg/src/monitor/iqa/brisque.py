"""BRISQUE: two-scale NSS features regressed onto a distortion-severity score."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy.stats import spearmanr

from . import constants as C
from .nss import check_gray, downsample2, mscn, nss_features

logger = logging.getLogger(__name__)

FORMAT = "monitor-brisque"
VERSION = 1
KIND = "kernel_ridge_rbf"

# searched on the training part only
GAMMA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)  # multiplied by 1 / n_features
RIDGE_GRID = (1e-4, 1e-3, 1e-2, 1e-1)
INNER_FOLDS = 4


def brisque_features(g: np.ndarray) -> np.ndarray:
    """36 features: at each of two scales GGD of MSCN and AGGD of the H, V, D1, D2 products."""
    g = check_gray(g, C.BRISQUE_MIN_DIM)
    f1 = nss_features(mscn(g))
    f2 = nss_features(mscn(downsample2(g)))
    return np.concatenate([f1, f2])


def _rbf(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


@dataclass
class BrisqueModel:
    lower: np.ndarray
    upper: np.ndarray
    support: np.ndarray
    dual: np.ndarray
    intercept: float
    gamma: float
    ridge: float
    meta: dict = field(default_factory=dict)

    def scale(self, feats: np.ndarray) -> np.ndarray:
        span = self.upper - self.lower
        safe = np.where(span > 0, span, 1.0)
        z = 2.0 * (np.atleast_2d(feats) - self.lower) / safe - 1.0
        return np.where(span > 0, z, 0.0)

    def predict_features(self, feats: np.ndarray) -> np.ndarray:
        k = _rbf(self.scale(feats), self.support, self.gamma)
        return np.clip(self.intercept + k @ self.dual, C.SCORE_MIN, C.SCORE_MAX)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "regressor": KIND,
            "gamma": self.gamma,
            "ridge": self.ridge,
            "intercept": self.intercept,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "dual": self.dual.tolist(),
            "support": self.support.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BrisqueModel":
        if d.get("format") != FORMAT:
            raise ValueError(f"not a BRISQUE model file (format={d.get('format')!r})")
        if d.get("version") != VERSION or d.get("regressor") != KIND:
            raise ValueError(f"unsupported BRISQUE model {d.get('version')}/{d.get('regressor')}")
        return cls(
            lower=np.asarray(d["lower"], dtype=np.float64),
            upper=np.asarray(d["upper"], dtype=np.float64),
            support=np.asarray(d["support"], dtype=np.float64).reshape(-1, len(d["lower"])),
            dual=np.asarray(d["dual"], dtype=np.float64),
            intercept=float(d["intercept"]),
            gamma=float(d["gamma"]),
            ridge=float(d["ridge"]),
            meta=dict(d.get("meta", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "BrisqueModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"BRISQUE model file not found: {path}")
        return cls.from_dict(json.loads(path.read_text()))


def brisque_score(g: np.ndarray, m: BrisqueModel) -> float:
    return float(m.predict_features(brisque_features(g))[0])


def _fit_krr(feats, targets, gamma_mult, ridge, meta=None) -> BrisqueModel:
    lower = feats.min(axis=0)
    upper = feats.max(axis=0)
    model = BrisqueModel(lower, upper, np.empty((0, feats.shape[1])), np.empty(0), 0.0,
                         gamma_mult / feats.shape[1], ridge, dict(meta or {}))
    z = model.scale(feats)
    k = _rbf(z, z, model.gamma)
    intercept = float(targets.mean())
    n = len(targets)
    dual = linalg.solve(k + ridge * n * np.eye(n), targets - intercept, assume_a="pos")
    model.support = z
    model.dual = dual
    model.intercept = intercept
    return model


def _select_hyper(feats, targets, rng) -> tuple[float, float]:
    folds = np.array_split(rng.permutation(len(targets)), INNER_FOLDS)
    best = None
    for gm in GAMMA_GRID:
        for ridge in RIDGE_GRID:
            err = 0.0
            for f in folds:
                tr = np.setdiff1d(np.arange(len(targets)), f)
                m = _fit_krr(feats[tr], targets[tr], gm, ridge)
                err += float(((m.predict_features(feats[f]) - targets[f]) ** 2).sum())
            if best is None or err < best[0]:
                best = (err, gm, ridge)
    return best[1], best[2]


def train_brisque_model(
    corpus: list[tuple[np.ndarray, float]],
    seed: int = 0,
    min_images: int = 50,
) -> BrisqueModel:
    """Fit kernel ridge regression from BRISQUE features to severity rescaled to [0, 100].

    A random fifth is held out to measure rank agreement; the final model is
    refit on the full corpus with the hyperparameters picked on the rest.
    """
    if len(corpus) < min_images:
        raise ValueError(f"need at least {min_images} training images, got {len(corpus)}")
    levels = np.asarray([lvl for _, lvl in corpus], dtype=np.float64)
    distinct = np.unique(levels)
    if len(distinct) < 3 or 0.0 not in distinct:
        raise ValueError("training corpus must span at least 3 distortion levels including level 0")
    targets = 100.0 * (levels - distinct.min()) / (distinct.max() - distinct.min())
    feats = np.vstack([brisque_features(g) for g, _ in corpus])

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(targets))
    n_hold = len(targets) // 5
    hold, train = order[:n_hold], order[n_hold:]
    gm, ridge = _select_hyper(feats[train], targets[train], rng)
    probe = _fit_krr(feats[train], targets[train], gm, ridge)
    rho = float(spearmanr(probe.predict_features(feats[hold]), targets[hold]).statistic)
    logger.info("BRISQUE held-out Spearman %.4f (gamma x%g, ridge %g)", rho, gm, ridge)
    meta = {
        "seed": seed,
        "n_train": int(len(targets)),
        "levels": [float(v) for v in distinct],
        "holdout_spearman": rho,
        "gamma_multiplier": gm,
    }
    return _fit_krr(feats, targets, gm, ridge, meta)
