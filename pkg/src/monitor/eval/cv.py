"""Event-integral, label-stratified k-fold cross-validation with fold-local preprocessing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureSet
from ..fuse import MONITOR, FusionPipeline
from ..learn import ModelSpec, TrainedModel, fit, predict
from .metrics import METRIC_NAMES, MetricsReport, metrics


class CvError(ValueError):
    pass


def assign_folds(event_ids, y, k: int = 5, seed: int = 0, stratified: bool = True) -> dict[str, int]:
    """Map each event to a fold; every fold gets the same number of events up to one.

    Events are shuffled, then (when stratified) stably ordered by their share of
    fake posts, and dealt round-robin so each fold spans the label mix.
    """
    if k < 2:
        raise CvError("k must be at least 2")
    events: dict[str, list[int]] = {}
    for e, lab in zip(event_ids, np.asarray(y)):
        events.setdefault(e, []).append(int(lab))
    names = list(events)
    if len(names) < k:
        raise CvError(f"{len(names)} events cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    order = [names[i] for i in rng.permutation(len(names))]
    if stratified:
        order.sort(key=lambda e: float(np.mean(events[e])))
    return {e: i % k for i, e in enumerate(order)}


def fit_fold(spec: ModelSpec, train: FeatureSet, feature_set: str = MONITOR,
             k_select: int = 15) -> tuple[FusionPipeline, TrainedModel]:
    """Selection, scaling and the classifier, all learnt from ``train`` rows only."""
    y = train.y()
    pipe = FusionPipeline.fit(train.textual, train.image, list(y), feature_set, k_select)
    model = fit(spec, pipe.transform(train.textual, train.image), y)
    return pipe, model


@dataclass(frozen=True)
class CvReport:
    folds: tuple[MetricsReport, ...]
    mean: dict
    std: dict
    pooled: MetricsReport
    fold_of_event: dict
    oof_scores: np.ndarray
    oof_labels: np.ndarray


def cross_validate(
    spec: ModelSpec,
    fs: FeatureSet,
    feature_set: str = MONITOR,
    k: int = 5,
    seed: int = 0,
    stratified: bool = True,
    k_select: int = 15,
) -> CvReport:
    y = fs.y()
    fold_of = assign_folds(fs.event_ids, y, k, seed, stratified)
    row_fold = np.array([fold_of[e] for e in fs.event_ids])
    oof_l = np.zeros(len(y), dtype=np.intp)
    oof_s = np.zeros(len(y))
    reports = []
    for f in range(k):
        test = np.flatnonzero(row_fold == f)
        train = np.flatnonzero(row_fold != f)
        pipe, model = fit_fold(spec, fs.take(train), feature_set, k_select)
        te = fs.take(test)
        pred = predict(model, pipe.transform(te.textual, te.image))
        oof_l[test] = pred.labels
        oof_s[test] = pred.scores
        reports.append(metrics(y[test], pred.labels))
    mean = {m: float(np.mean([getattr(r, m) for r in reports])) for m in METRIC_NAMES}
    std = {m: float(np.std([getattr(r, m) for r in reports])) for m in METRIC_NAMES}
    return CvReport(tuple(reports), mean, std, metrics(y, oof_l), fold_of, oof_s, oof_l)
