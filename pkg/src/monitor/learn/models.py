"""Model specs, fitting, prediction, importances and serialization for the four learners."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..fuse import FeatureMatrix
from .svm import train_linear_svm
from .tree import TreeArrays, grow_tree, tree_importances, tree_leaf_values

TREE, FOREST, KNN, SVM = "tree", "forest", "knn", "svm"
KINDS = (TREE, FOREST, KNN, SVM)

DEFAULTS: dict[str, dict[str, Any]] = {
    TREE: {"max_depth": None, "min_leaf": 2, "impurity": "gini"},
    FOREST: {"n_trees": 200, "features_per_split": "sqrt", "bootstrap": True, "min_leaf": 2,
             "max_depth": None, "seed": 0},
    KNN: {"k": 5, "metric": "euclidean"},
    SVM: {"lam": 1e-3, "epochs": 50, "seed": 0},
}
COMMON = {"class_weight": None}

FORMAT = "monitor-classifier"
VERSION = 1


class LearnError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LearnError(f"unknown model kind {self.kind!r}")
        merged = {**DEFAULTS[self.kind], **COMMON, **self.params}
        unknown = set(merged) - set(DEFAULTS[self.kind]) - set(COMMON)
        if unknown:
            raise LearnError(f"unknown {self.kind} hyperparameters {sorted(unknown)}")
        for k, v in merged.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool) and k != "seed" and v <= 0:
                raise LearnError(f"{self.kind}.{k} must be positive, got {v}")
        if merged["class_weight"] not in (None, "balanced"):
            raise LearnError("class_weight must be None or 'balanced'")
        object.__setattr__(self, "params", merged)

    @classmethod
    def of(cls, kind: str, **params) -> "ModelSpec":
        return cls(kind, params)


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    spec: ModelSpec
    columns: tuple[str, ...]
    structure: dict
    majority: int

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "kind": self.kind,
            "params": self.spec.params,
            "columns": list(self.columns),
            "majority": self.majority,
            "structure": _encode_structure(self.kind, self.structure),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != FORMAT or d.get("version") != VERSION:
            raise LearnError(f"unsupported model file {d.get('format')}/{d.get('version')}")
        kind = d["kind"]
        return cls(kind, ModelSpec(kind, d["params"]), tuple(d["columns"]), _decode_structure(kind, d["structure"]),
                   int(d["majority"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Prediction:
    labels: np.ndarray  # 1 = fake
    scores: np.ndarray  # fake-class confidence in [0, 1]


def _encode_structure(kind: str, s: dict) -> dict:
    if kind == TREE:
        return {"tree": s["tree"].to_dict()}
    if kind == FOREST:
        return {"trees": [t.to_dict() for t in s["trees"]], "importances": s["importances"].tolist()}
    if kind == KNN:
        return {"X": s["X"].tolist(), "y": s["y"].tolist()}
    return {"w": s["w"].tolist(), "history": list(s["history"])}


def _decode_structure(kind: str, d: dict) -> dict:
    if kind == TREE:
        return {"tree": TreeArrays.from_dict(d["tree"])}
    if kind == FOREST:
        return {"trees": [TreeArrays.from_dict(t) for t in d["trees"]],
                "importances": np.asarray(d["importances"], dtype=np.float64)}
    if kind == KNN:
        return {"X": np.asarray(d["X"], dtype=np.float64), "y": np.asarray(d["y"], dtype=np.intp)}
    return {"w": np.asarray(d["w"], dtype=np.float64), "history": list(d["history"])}


def _as_array(X) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(X, FeatureMatrix):
        return X.dense(), X.column_names
    raise LearnError("expected a FeatureMatrix")


def _weights(y: np.ndarray, mode) -> np.ndarray:
    if mode is None:
        return np.ones(len(y))
    n_pos = y.sum()
    n_neg = len(y) - n_pos
    return np.where(y == 1, len(y) / (2.0 * n_pos), len(y) / (2.0 * n_neg))


def _n_features_per_split(setting, p: int) -> int:
    if setting == "sqrt":
        return max(1, math.ceil(math.sqrt(p)))
    return max(1, min(int(setting), p))


def fit(spec: ModelSpec, X: FeatureMatrix, y) -> TrainedModel:
    """Fit a classifier on a dense matrix and binary labels (1 = fake, 0 = real)."""
    A, cols = _as_array(X)
    y = np.asarray(y, dtype=np.intp)
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise LearnError("empty training matrix")
    if len(y) != A.shape[0]:
        raise LearnError("labels and rows differ in length")
    if not set(np.unique(y)) <= {0, 1}:
        raise LearnError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise LearnError("training labels contain a single class")
    P = spec.params
    w = _weights(y, P["class_weight"])
    majority = int(y.sum() * 2 >= len(y))
    # constant columns can never split; leaving them out of the candidate pool keeps
    # tree fits (and forest feature draws) unchanged when such columns are added
    varying = np.flatnonzero(np.ptp(A, axis=0) > 0)

    if spec.kind == TREE:
        t = grow_tree(A, y, w, P["min_leaf"], P["max_depth"], candidates=varying)
        s = {"tree": t}
    elif spec.kind == FOREST:
        m = _n_features_per_split(P["features_per_split"], len(varying))
        trees, imps = [], []
        for child in np.random.SeedSequence(P["seed"]).spawn(P["n_trees"]):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, len(y), len(y)) if P["bootstrap"] else np.arange(len(y))
            yb = y[idx]
            if yb.min() == yb.max():
                idx = np.arange(len(y))
            t = grow_tree(A[idx], y[idx], w[idx], P["min_leaf"], P["max_depth"], m, varying, rng)
            trees.append(t)
            ti = tree_importances(t, A.shape[1])
            if ti.sum() > 0:
                imps.append(ti / ti.sum())
        imp = np.mean(imps, axis=0) if imps else np.zeros(A.shape[1])
        s = {"trees": trees, "importances": imp / imp.sum() if imp.sum() > 0 else imp}
    elif spec.kind == KNN:
        s = {"X": A.copy(), "y": y.copy()}
    else:
        wv, hist = train_linear_svm(A, y, P["lam"], P["epochs"], P["seed"], w)
        s = {"w": wv, "history": hist}
    return TrainedModel(spec.kind, spec, cols, s, majority)


def _vote(scores: np.ndarray, majority: int) -> np.ndarray:
    return np.where(scores > 0.5, 1, np.where(scores < 0.5, 0, majority)).astype(np.intp)


def predict(m: TrainedModel, X: FeatureMatrix) -> Prediction:
    A, cols = _as_array(X)
    if cols != m.columns:
        raise LearnError("feature columns differ from the training columns (names and order must match)")
    s = m.structure
    if m.kind == TREE:
        sc = tree_leaf_values(s["tree"], A)
        return Prediction(_vote(sc, m.majority), sc)
    if m.kind == FOREST:
        votes = np.zeros(len(A))
        for t in s["trees"]:
            votes += _vote(tree_leaf_values(t, A), m.majority)
        sc = votes / len(s["trees"])
        return Prediction(_vote(sc, m.majority), sc)
    if m.kind == KNN:
        k = min(m.spec.params["k"], len(s["y"]))
        d2 = (A * A).sum(1)[:, None] + (s["X"] ** 2).sum(1)[None, :] - 2.0 * A @ s["X"].T
        d2 = np.maximum(d2, 0.0)
        # stable sort: equidistant neighbours are taken in training order
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
        ny = s["y"][nn]
        sc = ny.mean(axis=1)
        lab = np.where(sc > 0.5, 1, np.where(sc < 0.5, 0, ny[:, 0]))
        return Prediction(lab.astype(np.intp), sc)
    margin = A @ s["w"][:-1] + s["w"][-1]
    sc = 1.0 / (1.0 + np.exp(-margin))
    return Prediction((margin > 0).astype(np.intp), sc)


def feature_importances(m: TrainedModel) -> dict[str, float]:
    """Mean decrease in Gini impurity, normalised to sum 1 (tree kinds only)."""
    if m.kind == TREE:
        imp = tree_importances(m.structure["tree"], len(m.columns))
        imp = imp / imp.sum() if imp.sum() > 0 else imp
    elif m.kind == FOREST:
        imp = m.structure["importances"]
    else:
        raise LearnError(f"feature importances are defined for tree models only, not {m.kind}")
    return {c: float(v) for c, v in zip(m.columns, imp)}
