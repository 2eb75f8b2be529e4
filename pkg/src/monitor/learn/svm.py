"""Linear SVM: L2-regularised hinge loss by stochastic subgradient descent."""
from __future__ import annotations

import numpy as np


def objective(w: np.ndarray, Xb: np.ndarray, s: np.ndarray, lam: float, sw: np.ndarray) -> float:
    """lam/2 |w|^2 + weighted mean hinge loss; ``Xb`` carries the bias column, ``s`` is ±1."""
    hinge = np.maximum(0.0, 1.0 - s * (Xb @ w))
    return 0.5 * lam * float(w @ w) + float(sw @ hinge) / float(sw.sum())


def train_linear_svm(
    X: np.ndarray, y: np.ndarray, lam: float = 1e-3, epochs: int = 50, seed: int = 0,
    sample_weight: np.ndarray | None = None,
) -> tuple[np.ndarray, list[float]]:
    """Pegasos passes with step 1/(lam t); an epoch is kept only if it does not raise the objective.

    A rejected epoch halves the step multiplier for the following ones, so the
    recorded objective history is nonincreasing. Returns the weight vector
    (last entry is the bias) and the per-epoch objective.
    """
    n = len(y)
    Xb = np.hstack([X, np.ones((n, 1))])
    s = np.where(y > 0, 1.0, -1.0)
    sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    sw_norm = sw * (n / sw.sum())
    rng = np.random.default_rng(seed)
    w = np.zeros(Xb.shape[1])
    best = objective(w, Xb, s, lam, sw)
    history = [best]
    t = 0
    mult = 1.0
    for _ in range(epochs):
        cand = w.copy()
        t0 = t
        for i in rng.permutation(n):
            t += 1
            eta = mult / (lam * t)
            viol = s[i] * (Xb[i] @ cand) < 1.0
            cand *= 1.0 - eta * lam
            if viol:
                cand += eta * sw_norm[i] * s[i] * Xb[i]
        val = objective(cand, Xb, s, lam, sw)
        if val <= best:
            w, best = cand, val
        else:
            t = t0 + n
            mult *= 0.5
        history.append(best)
    return w, history
