"""CART classification tree (weighted Gini) used alone and inside the forest."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class TreeArrays:
    """Flat tree; node 0 is the root, ``feature == -1`` marks leaves."""

    feature: np.ndarray  # intp
    threshold: np.ndarray  # go left when x <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # weighted fraction of the positive class at the node
    n_samples: np.ndarray
    impurity_drop: np.ndarray  # weighted Gini decrease of each split (0 at leaves)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeArrays":
        ints = {"feature", "left", "right", "n_samples"}
        return cls(**{k: np.asarray(d[k], dtype=np.intp if k in ints else np.float64)
                      for k in cls.__dataclass_fields__})


def _gini(pos_w: np.ndarray, tot_w: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(tot_w > 0, pos_w / tot_w, 0.0)
    return 2.0 * p * (1.0 - p)


def _best_split(xs: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int):
    """Best (feature column, threshold, gain) over the columns of ``xs`` or None."""
    n, f = xs.shape
    order = np.argsort(xs, axis=0, kind="stable")
    xsort = np.take_along_axis(xs, order, axis=0)
    wy = (w * y)[order]
    ww = w[order]
    cpos = np.cumsum(wy, axis=0)
    ctot = np.cumsum(ww, axis=0)
    tot_pos, tot_w = cpos[-1], ctot[-1]
    # position i means the first i sorted rows go left
    i = np.arange(min_leaf, n - min_leaf + 1)
    if len(i) == 0:
        return None
    lpos, lw = cpos[i - 1], ctot[i - 1]
    rpos, rw = tot_pos - lpos, tot_w - lw
    child = lw * _gini(lpos, lw) + rw * _gini(rpos, rw)
    valid = xsort[i - 1] < xsort[np.minimum(i, n - 1)]
    parent = tot_w * _gini(tot_pos, tot_w)
    gain = np.where(valid, parent - child, -np.inf)
    # first maximum in (feature, position) order keeps ties deterministic
    flat = int(np.argmax(gain.T))
    j, pos = divmod(flat, len(i))
    best = gain[pos, j]
    if not np.isfinite(best) or best <= 1e-12 * max(float(tot_w[0]), 1.0):
        return None
    k = i[pos]
    thr = 0.5 * (xsort[k - 1, j] + xsort[k, j])
    if not thr < xsort[k, j]:  # midpoint rounded onto the right value
        thr = xsort[k - 1, j]
    return j, float(thr), float(best)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    min_leaf: int = 2,
    max_depth: int | None = None,
    max_features: int | None = None,
    candidates: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> TreeArrays:
    """Grow a binary tree on positive-class indicator ``y`` with sample weights ``w``.

    ``candidates`` restricts the splitting columns; with ``max_features`` a fresh
    random subset of that size is drawn at every node.
    """
    cand = np.arange(X.shape[1]) if candidates is None else np.asarray(candidates, dtype=np.intp)
    feature, threshold, left, right, value, nsamp, drop = [], [], [], [], [], [], []

    def new_node(idx) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        tw = w[idx].sum()
        value.append(float((w[idx] * y[idx]).sum() / tw) if tw > 0 else 0.0)
        nsamp.append(len(idx))
        drop.append(0.0)
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        v = value[node]
        if v <= 0.0 or v >= 1.0 or len(idx) < 2 * min_leaf or len(cand) == 0:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        cols = cand
        if max_features is not None and max_features < len(cand):
            cols = np.sort(rng.choice(cand, size=max_features, replace=False))
        found = _best_split(X[np.ix_(idx, cols)], y[idx], w[idx], min_leaf)
        if found is None:
            continue
        j, thr, gain = found
        f = int(cols[j])
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node], drop[node] = f, thr, gain
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return TreeArrays(
        np.asarray(feature, dtype=np.intp),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.intp),
        np.asarray(right, dtype=np.intp),
        np.asarray(value, dtype=np.float64),
        np.asarray(nsamp, dtype=np.intp),
        np.asarray(drop, dtype=np.float64),
    )


def tree_leaf_values(t: TreeArrays, X: np.ndarray) -> np.ndarray:
    node = np.zeros(len(X), dtype=np.intp)
    rows = np.arange(len(X))
    while True:
        f = t.feature[node]
        inner = f != LEAF
        if not inner.any():
            return t.value[node]
        r = rows[inner]
        n = node[inner]
        go_left = X[r, t.feature[n]] <= t.threshold[n]
        node[r] = np.where(go_left, t.left[n], t.right[n])


def tree_importances(t: TreeArrays, n_features: int) -> np.ndarray:
    imp = np.zeros(n_features)
    inner = t.feature != LEAF
    np.add.at(imp, t.feature[inner], t.impurity_drop[inner])
    return imp
