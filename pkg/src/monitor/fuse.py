"""Feature matrices, gain-ratio selection, min-max scaling and early fusion."""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NA = "NA"
IMAGE_COLUMNS = ("brisque", "niqe", "piqe", "count_img", "ratio_img1", "ratio_img2", "ratio_img3")


class FusionError(ValueError):
    pass


class NoInformativeFeature(FusionError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    column_names: tuple[str, ...]
    values: np.ndarray
    missing: np.ndarray
    row_ids: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(len(self.row_ids), len(self.column_names))
        m = np.asarray(self.missing, dtype=bool).reshape(v.shape)
        if len(set(self.column_names)) != len(self.column_names):
            raise FusionError("column names must be unique")
        v = np.where(m, np.nan, v)
        if np.isnan(v[~m]).any():
            raise FusionError("NaN value outside the missing mask")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "missing", m)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "row_ids", tuple(self.row_ids))

    @classmethod
    def from_records(
        cls, row_ids: Sequence[str], records: Sequence[Mapping], columns: Sequence[str] | None = None
    ) -> "FeatureMatrix":
        cols = tuple(columns) if columns is not None else (tuple(records[0]) if records else ())
        vals = np.zeros((len(records), len(cols)))
        miss = np.zeros_like(vals, dtype=bool)
        for i, r in enumerate(records):
            for j, c in enumerate(cols):
                v = r.get(c)
                if v is None or (isinstance(v, float) and math.isnan(v)):
                    miss[i, j] = True
                else:
                    vals[i, j] = float(v)
        return cls(cols, vals, miss, tuple(row_ids))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]

    def select(self, names: Iterable[str]) -> "FeatureMatrix":
        names = tuple(names)
        missing_cols = [n for n in names if n not in self.column_names]
        if missing_cols:
            raise FusionError(f"unknown columns {missing_cols}")
        idx = [self.column_names.index(n) for n in names]
        return FeatureMatrix(names, self.values[:, idx], self.missing[:, idx], self.row_ids)

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=np.intp)
        return FeatureMatrix(self.column_names, self.values[rows], self.missing[rows],
                             tuple(self.row_ids[i] for i in rows))

    def dense(self) -> np.ndarray:
        if self.missing.any():
            raise FusionError("matrix still has missing cells; impute first")
        return self.values.copy()

    def to_tsv(self, fh=None) -> str:
        out = io.StringIO()
        out.write("\t".join(("id",) + self.column_names) + "\n")
        for i, rid in enumerate(self.row_ids):
            cells = [NA if self.missing[i, j] else repr(float(self.values[i, j])) for j in range(self.shape[1])]
            out.write("\t".join([rid] + cells) + "\n")
        s = out.getvalue()
        if fh is not None:
            Path(fh).write_text(s) if isinstance(fh, (str, Path)) else fh.write(s)
        return s

    @classmethod
    def from_tsv(cls, path: str | Path) -> "FeatureMatrix":
        return cls.parse_tsv(Path(path).read_text())

    @classmethod
    def parse_tsv(cls, text: str) -> "FeatureMatrix":
        lines = [ln for ln in text.splitlines() if ln]
        header = lines[0].split("\t")
        if header[0] != "id":
            raise FusionError("feature table must start with an 'id' column")
        rows = [ln.split("\t") for ln in lines[1:]]
        ids = [r[0] for r in rows]
        miss = np.array([[c == NA for c in r[1:]] for r in rows], dtype=bool).reshape(len(rows), len(header) - 1)
        vals = np.array([[0.0 if c == NA else float(c) for c in r[1:]] for r in rows]).reshape(miss.shape)
        return cls(tuple(header[1:]), vals, miss, tuple(ids))


def hstack(*blocks: FeatureMatrix) -> FeatureMatrix:
    blocks = [b for b in blocks if b is not None]
    ids = blocks[0].row_ids
    for b in blocks[1:]:
        if b.row_ids != ids:
            raise FusionError("row ids differ between feature blocks (order matters)")
    names = tuple(n for b in blocks for n in b.column_names)
    return FeatureMatrix(names, np.hstack([b.values for b in blocks]), np.hstack([b.missing for b in blocks]), ids)


# ---------------------------------------------------------------- discretization


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis of a count array."""
    counts = np.asarray(counts, dtype=np.float64)
    tot = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tot > 0, counts / tot, 0.0)
        t = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -t.sum(axis=-1)


def _encode(labels) -> tuple[np.ndarray, int]:
    vals = [getattr(v, "value", v) for v in labels]
    uniq = sorted(set(vals), key=str)
    idx = {u: i for i, u in enumerate(uniq)}
    return np.array([idx[v] for v in vals], dtype=np.intp), len(uniq)


def discretize(column, labels) -> np.ndarray:
    """Supervised entropy binning with the MDL stopping rule; returns sorted cut points.

    Missing values (NaN) take no part in the search.
    """
    x = np.asarray(column, dtype=np.float64)
    y, _ = _encode(labels)
    if len(x) != len(y):
        raise FusionError("column and labels differ in length")
    ok = ~np.isnan(x)
    x, y = x[ok], y[ok]
    if len(x) < 2:
        return np.empty(0)
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    k_all = int(y.max()) + 1
    onehot = np.zeros((len(y), k_all))
    onehot[np.arange(len(y)), y] = 1.0
    cum = np.vstack([np.zeros(k_all), np.cumsum(onehot, axis=0)])

    cuts = []
    stack = [(0, len(x))]
    while stack:
        lo, hi = stack.pop()
        n = hi - lo
        cand = lo + 1 + np.flatnonzero(x[lo + 1 : hi] > x[lo : hi - 1])
        if len(cand) == 0:
            continue
        total = cum[hi] - cum[lo]
        left = cum[cand] - cum[lo]
        right = total - left
        nl = (cand - lo).astype(np.float64)
        e_left, e_right = _entropy(left), _entropy(right)
        weighted = (nl * e_left + (n - nl) * e_right) / n
        best = int(np.argmin(weighted))
        e_s = float(_entropy(total))
        gain = e_s - float(weighted[best])
        k = int((total > 0).sum())
        k1 = int((left[best] > 0).sum())
        k2 = int((right[best] > 0).sum())
        delta = math.log2(3**k - 2) - (k * e_s - k1 * float(e_left[best]) - k2 * float(e_right[best]))
        if gain > (math.log2(n - 1) + delta) / n:
            c = int(cand[best])
            cuts.append(0.5 * (x[c - 1] + x[c]))
            stack.append((lo, c))
            stack.append((c, hi))
    return np.array(sorted(cuts))


def apply_bins(column, cuts) -> np.ndarray:
    """Bin index per value (number of cuts at or below it); missing values get bin -1."""
    x = np.asarray(column, dtype=np.float64)
    b = np.searchsorted(np.asarray(cuts), x, side="right").astype(np.intp)
    b[np.isnan(x)] = -1
    return b


def gain_ratio(column, labels) -> float:
    """Information gain over split information (bits); 0 for a single-valued column."""
    xs, _ = _encode(column)
    y, ky = _encode(labels)
    if len(xs) != len(y):
        raise FusionError("column and labels differ in length")
    if len(y) == 0:
        return 0.0
    kx = int(xs.max()) + 1
    table = np.zeros((kx, ky))
    np.add.at(table, (xs, y), 1.0)
    n = len(y)
    split_info = float(_entropy(table.sum(axis=1)))
    if split_info <= 0.0:
        return 0.0
    h_y = float(_entropy(table.sum(axis=0)))
    h_y_given_x = float((table.sum(axis=1) / n) @ _entropy(table))
    return max(h_y - h_y_given_x, 0.0) / split_info


@dataclass(frozen=True)
class SelectionReport:
    scores: dict
    selected: tuple[str, ...]
    cuts: dict = field(default_factory=dict)

    def to_tsv(self) -> str:
        lines = ["feature\tgain_ratio\tselected"]
        for name, s in sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{name}\t{s:.12g}\t{int(name in self.selected)}")
        return "\n".join(lines) + "\n"


def feature_gain_ratio(column, labels) -> tuple[float, np.ndarray]:
    cuts = discretize(column, labels)
    return gain_ratio(apply_bins(column, cuts), labels), cuts


def select_textual(m: FeatureMatrix, labels, k: int = 15) -> SelectionReport:
    """Top-``k`` columns by gain ratio among those scoring above zero (ties by name)."""
    bad = [c for c in m.column_names if c in IMAGE_COLUMNS]
    if bad:
        raise FusionError(f"image columns are not subject to selection: {bad}")
    labels = list(labels)
    if len(set(getattr(v, "value", v) for v in labels)) < 2:
        raise FusionError("selection needs at least two label classes")
    scores, cuts = {}, {}
    for j, name in enumerate(m.column_names):
        scores[name], cuts[name] = feature_gain_ratio(m.values[:, j], labels)
    ranked = sorted((n for n, s in scores.items() if s > 0), key=lambda n: (-scores[n], n))
    if not ranked:
        raise NoInformativeFeature(
            "no textual feature has a positive gain ratio; inspect labels and feature extraction"
        )
    if len(ranked) < k:
        logger.warning("only %d textual feature(s) with positive gain ratio (k=%d)", len(ranked), k)
    return SelectionReport(scores, tuple(ranked[:k]), cuts)


# ---------------------------------------------------------------- scaling


@dataclass(frozen=True)
class Scaler:
    column_names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    median: np.ndarray


def fit_scaler(train: FeatureMatrix) -> Scaler:
    v = train.values
    obs = ~train.missing
    lo = np.zeros(v.shape[1])
    hi = np.zeros(v.shape[1])
    med = np.zeros(v.shape[1])
    for j in range(v.shape[1]):
        col = v[obs[:, j], j]
        if col.size == 0:
            logger.warning("column %s has no observed training value; imputing 0", train.column_names[j])
            continue
        lo[j], hi[j], med[j] = col.min(), col.max(), np.median(col)
    return Scaler(train.column_names, lo, hi, med)


def apply_scaler(s: Scaler, m: FeatureMatrix) -> FeatureMatrix:
    if m.column_names != s.column_names:
        raise FusionError("matrix columns do not match the scaler's training columns")
    v = np.where(m.missing, s.median[None, :], m.values)
    span = s.upper - s.lower
    safe = np.where(span > 0, span, 1.0)
    z = np.clip((v - s.lower) / safe, 0.0, 1.0)
    z = np.where(span > 0, z, 0.0)
    return FeatureMatrix(m.column_names, z, np.zeros_like(m.missing), m.row_ids)


def fuse(textual: FeatureMatrix, image: FeatureMatrix) -> FeatureMatrix:
    """Column concatenation, textual block first."""
    if textual.row_ids != image.row_ids:
        raise FusionError("textual and image rows are not aligned")
    if textual.shape[1] == 0:
        return image
    return hstack(textual, image)


# ---------------------------------------------------------------- fold-local preparation

TEXTUAL, IMAGE, MONITOR = "textual", "image", "monitor"
FEATURE_SETS = (TEXTUAL, IMAGE, MONITOR)


@dataclass(frozen=True)
class FusionPipeline:
    """Selection and scaling learnt on training rows, replayable on any rows."""

    feature_set: str
    selection: SelectionReport | None
    scaler: Scaler

    @classmethod
    def fit(cls, textual: FeatureMatrix, image: FeatureMatrix, labels, feature_set: str = MONITOR,
            k: int = 15) -> "FusionPipeline":
        if feature_set not in FEATURE_SETS:
            raise FusionError(f"unknown feature set {feature_set!r}")
        sel = None
        if feature_set in (TEXTUAL, MONITOR):
            sel = select_textual(textual, labels, k)
        pipe = cls(feature_set, sel, Scaler((), np.empty(0), np.empty(0), np.empty(0)))
        return cls(feature_set, sel, fit_scaler(pipe._raw(textual, image)))

    def _raw(self, textual: FeatureMatrix, image: FeatureMatrix) -> FeatureMatrix:
        img = image.select(IMAGE_COLUMNS)
        if self.feature_set == IMAGE:
            return img
        txt = textual.select(self.selection.selected)
        if self.feature_set == TEXTUAL:
            return txt
        return fuse(txt, img)

    def transform(self, textual: FeatureMatrix, image: FeatureMatrix) -> FeatureMatrix:
        return apply_scaler(self.scaler, self._raw(textual, image))

    def to_dict(self) -> dict:
        sel = None
        if self.selection is not None:
            sel = {"selected": list(self.selection.selected),
                   "scores": {k: float(v) for k, v in sorted(self.selection.scores.items())}}
        return {
            "feature_set": self.feature_set,
            "selection": sel,
            "scaler": {
                "columns": list(self.scaler.column_names),
                "lower": self.scaler.lower.tolist(),
                "upper": self.scaler.upper.tolist(),
                "median": self.scaler.median.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusionPipeline":
        sel = None
        if d.get("selection") is not None:
            sel = SelectionReport(dict(d["selection"]["scores"]), tuple(d["selection"]["selected"]))
        sc = d["scaler"]
        scaler = Scaler(tuple(sc["columns"]), np.asarray(sc["lower"], dtype=np.float64),
                        np.asarray(sc["upper"], dtype=np.float64), np.asarray(sc["median"], dtype=np.float64))
        return cls(d["feature_set"], sel, scaler)
