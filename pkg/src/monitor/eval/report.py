"""Importance rankings, class-conditional quartiles and table formatting."""
from __future__ import annotations

import numpy as np

from ..fuse import FeatureMatrix
from ..learn import TrainedModel, feature_importances
from .metrics import METRIC_NAMES

FEATURE_SET_LABELS = {"textual": "Textual", "image": "Image", "monitor": "MONITOR"}
QUARTILE_COLUMNS = ("min", "q1", "median", "q3", "max")


def export_importances(m: TrainedModel, k: int = 15) -> list[tuple[str, float]]:
    """Top-``k`` (feature, importance) pairs, descending, ties by name."""
    imp = feature_importances(m)
    return sorted(imp.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def export_class_distributions(X: FeatureMatrix, y, features) -> list[dict]:
    """Five-number summary of each feature per class over its observed values."""
    y = np.asarray(y)
    rows = []
    for name in features:
        j = X.column_names.index(name)
        for cls, cname in ((0, "real"), (1, "fake")):
            pick = (y == cls) & ~X.missing[:, j]
            v = X.values[pick, j]
            row = {"feature": name, "class": cname, "n": int(v.size)}
            if v.size:
                q = np.percentile(v, [0, 25, 50, 75, 100])
                row.update({c: float(x) for c, x in zip(QUARTILE_COLUMNS, q)})
            else:
                row.update({c: None for c in QUARTILE_COLUMNS})
            rows.append(row)
    return rows


def fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def tsv(rows: list[dict], columns) -> str:
    out = ["\t".join(columns)]
    out += ["\t".join(fmt(r.get(c)) for c in columns) for r in rows]
    return "\n".join(out) + "\n"


def grid_text(rows: list[dict], title: str) -> str:
    """Fixed-width grid: one line per (feature set, model) with the four metrics."""
    head = f"{'features':<10}{'model':<8}" + "".join(f"{m:>11}" for m in METRIC_NAMES)
    lines = [title, head, "-" * len(head)]
    for r in rows:
        lines.append(f"{FEATURE_SET_LABELS[r['features']]:<10}{r['model']:<8}"
                     + "".join(f"{r[m]:>11.4f}" for m in METRIC_NAMES))
    return "\n".join(lines) + "\n"
