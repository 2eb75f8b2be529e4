"""Binary classification metrics with Fake as the positive class."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int
    flags: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_NAMES}


def metrics(y_true, y_pred, positive: int = 1) -> MetricsReport:
    """Confusion-count metrics; an undefined ratio is reported as 0 and flagged."""
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise ValueError("metrics need at least one row")
    tp = int(np.sum((p == positive) & (t == positive)))
    fp = int(np.sum((p == positive) & (t != positive)))
    fn = int(np.sum((p != positive) & (t == positive)))
    tn = int(t.size - tp - fp - fn)
    flags = []
    if tp + fp == 0:
        precision = 0.0
        flags.append("precision_undefined")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append("recall_undefined")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1 = 0.0
        flags.append("f1_undefined")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport((tp + tn) / t.size, precision, recall, f1, tp, fp, tn, fn, tuple(flags))


def f1_consistent(r: MetricsReport, tol: float = 1e-12) -> bool:
    if r.precision + r.recall == 0:
        return r.f1 == 0
    return abs(r.f1 - 2 * r.precision * r.recall / (r.precision + r.recall)) <= tol
