"""End-to-end run: load, filter, extract, cross-validate / hold out, export tables."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus import filter_usable, load_posts, ratio_train_events, with_labels_known
from ..features import FeatureSet, extract_features
from ..fuse import FEATURE_SETS, MONITOR, hstack
from ..imagestat import PIXEL
from ..iqa import QualityModels, load_default_models
from ..learn import FOREST, KINDS, ModelSpec, fit, predict
from ..textfeat import Lexicon, default_lexicon
from .cv import cross_validate, fit_fold
from .metrics import METRIC_NAMES, MetricsReport, metrics
from .report import QUARTILE_COLUMNS, export_class_distributions, export_importances, grid_text, tsv

logger = logging.getLogger(__name__)

GRID_COLUMNS = ("protocol", "features", "model") + METRIC_NAMES + ("tp", "fp", "tn", "fn")
FOLD_COLUMNS = ("features", "model", "fold") + METRIC_NAMES
CV, HOLDOUT = "cv", "holdout"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    dataset: Path
    out: Path
    split: str = "fixed"
    seed: int = 0
    feature_sets: tuple[str, ...] = FEATURE_SETS
    models: tuple[str, ...] = KINDS
    k_folds: int = 5
    k_select: int = 15
    stratified: bool = True
    protocols: tuple[str, ...] = (CV, HOLDOUT)
    ratio: float = 0.8
    identity_mode: str = PIXEL
    model_dir: Path | None = None
    lexicon: Path | None = None
    model_params: dict = field(default_factory=dict)

    def spec(self, kind: str) -> ModelSpec:
        params = dict(self.model_params.get(kind, {}))
        if kind in ("forest", "svm"):
            params.setdefault("seed", self.seed)
        return ModelSpec(kind, params)


@dataclass
class RunReport:
    grid: list[dict]
    folds: list[dict]
    importances: list[tuple[str, float]]
    quartiles: list[dict]
    selection_tsv: str
    cells: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)


def _stage(name):
    def deco(fn):
        def run(*a, **kw):
            try:
                return fn(*a, **kw)
            except StageError:
                raise
            except Exception as exc:  # noqa: BLE001 - re-raised with the stage tag
                raise StageError(name, exc) from exc
        return run
    return deco


def is_matrix_dir(p: Path) -> bool:
    return Path(p).is_dir() and (Path(p) / "rows.tsv").exists()


@_stage("load")
def load_features(dataset: Path, model_dir: Path | None = None, lexicon: Path | None = None,
                  identity_mode: str = PIXEL, strict: bool = False) -> FeatureSet:
    """Extracted matrices from an ``extract`` directory, or a fresh extraction from JSONL."""
    if is_matrix_dir(dataset):
        return FeatureSet.load(dataset)
    d = load_posts(dataset, strict=strict)
    d = with_labels_known(filter_usable(d))
    models = QualityModels.load(model_dir) if model_dir else load_default_models()
    lex: Lexicon = Lexicon.from_manifest(lexicon) if lexicon else default_lexicon()
    return extract_features(d, models, lex, identity_mode)


@_stage("split")
def split_features(fs: FeatureSet, scheme: str, seed: int, ratio: float = 0.8) -> tuple[FeatureSet, FeatureSet]:
    if scheme == "fixed":
        return fs.where_split("train"), fs.where_split("test")
    if scheme == "ratio":
        order = list(dict.fromkeys(fs.event_ids))
        train_ev = ratio_train_events(order, ratio, seed)
        tr = [i for i, e in enumerate(fs.event_ids) if e in train_ev]
        te = [i for i, e in enumerate(fs.event_ids) if e not in train_ev]
        return fs.take(tr), fs.take(te)
    raise ValueError(f"unknown split scheme {scheme!r}")


def _cell(protocol, fset, kind, r: MetricsReport) -> dict:
    row = {"protocol": protocol, "features": fset, "model": kind}
    row.update(r.as_dict())
    row.update({"tp": r.tp, "fp": r.fp, "tn": r.tn, "fn": r.fn})
    return row


def run_pipeline(cfg: RunConfig, fs: FeatureSet | None = None) -> RunReport:
    """Run the (model x feature set) grid and write every table under ``cfg.out``.

    Cross-validation cells are pooled over out-of-fold predictions, so each
    cell is a single confusion table; per-fold values go to ``cv_folds.tsv``.
    """
    fs = fs if fs is not None else load_features(cfg.dataset, cfg.model_dir, cfg.lexicon, cfg.identity_mode)
    train, test = split_features(fs, cfg.split, cfg.seed, cfg.ratio)
    if len(train.row_ids) == 0:
        raise StageError("split", ValueError("training side is empty"))
    grid, folds, cells = [], [], {}

    @_stage("cv")
    def run_cv():
        for fset in cfg.feature_sets:
            for kind in cfg.models:
                rep = cross_validate(cfg.spec(kind), train, fset, cfg.k_folds, cfg.seed, cfg.stratified,
                                     cfg.k_select)
                cells[(CV, fset, kind)] = rep
                grid.append(_cell(CV, fset, kind, rep.pooled))
                for i, r in enumerate(rep.folds):
                    folds.append({"features": fset, "model": kind, "fold": i, **r.as_dict()})

    @_stage("holdout")
    def run_holdout():
        for fset in cfg.feature_sets:
            for kind in cfg.models:
                pipe, model = fit_fold(cfg.spec(kind), train, fset, cfg.k_select)
                pred = predict(model, pipe.transform(test.textual, test.image))
                r = metrics(test.y(), pred.labels)
                cells[(HOLDOUT, fset, kind)] = r
                grid.append(_cell(HOLDOUT, fset, kind, r))

    if CV in cfg.protocols:
        run_cv()
    if HOLDOUT in cfg.protocols:
        if len(test.row_ids):
            run_holdout()
        else:
            logger.warning("test side is empty; holdout protocol skipped")

    @_stage("importances")
    def run_importances():
        pipe, model = fit_fold(cfg.spec(FOREST), train, MONITOR, cfg.k_select)
        top = export_importances(model, 15)
        raw = hstack(train.textual, train.image)
        quart = export_class_distributions(raw, train.y(), [n for n, _ in top])
        return pipe, top, quart

    pipe, top, quart = run_importances()
    report = RunReport(grid, folds, top, quart, pipe.selection.to_tsv(), cells)
    _stage("report")(write_report)(cfg, report, train)
    return report


def write_report(cfg: RunConfig, rep: RunReport, train: FeatureSet) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "grid.tsv": tsv(rep.grid, GRID_COLUMNS),
        "cv_folds.tsv": tsv(rep.folds, FOLD_COLUMNS),
        "importances.tsv": tsv([{"rank": i + 1, "feature": n, "importance": float(v)}
                                for i, (n, v) in enumerate(rep.importances)], ("rank", "feature", "importance")),
        "class_quartiles.tsv": tsv(rep.quartiles, ("feature", "class", "n") + QUARTILE_COLUMNS),
        "selection.tsv": rep.selection_tsv,
    }
    text = []
    for proto, title in ((CV, f"{cfg.k_folds}-fold cross-validation (pooled out-of-fold)"),
                         (HOLDOUT, "held-out test split")):
        rows = [r for r in rep.grid if r["protocol"] == proto]
        if rows:
            text.append(grid_text(rows, title))
    files["grid.txt"] = "\n".join(text)
    cv_cells = [c for k, c in rep.cells.items() if k[0] == CV]
    if cv_cells:
        fold_map = cv_cells[0].fold_of_event
        files["folds.tsv"] = tsv([{"event_id": e, "fold": f} for e, f in sorted(fold_map.items())],
                                 ("event_id", "fold"))
    run_info = {
        "dataset": Path(cfg.dataset).name,
        "split": cfg.split,
        "seed": cfg.seed,
        "feature_sets": list(cfg.feature_sets),
        "models": {k: cfg.spec(k).params for k in cfg.models},
        "k_folds": cfg.k_folds,
        "k_select": cfg.k_select,
        "stratified": cfg.stratified,
        "n_train_rows": len(train.row_ids),
        "n_train_fake": int(np.sum(train.y())),
    }
    files["run.json"] = json.dumps(run_info, indent=1, sort_keys=True) + "\n"
    for name, content in files.items():
        (out / name).write_text(content)
        rep.files[name] = out / name
