"""PIQE: block-wise, opinion-unaware quality score (higher = worse, range [0, 100])."""
from __future__ import annotations

import numpy as np

from . import constants as C
from .nss import check_gray, mscn


def _pad_to_blocks(g: np.ndarray, block: int) -> np.ndarray:
    h, w = g.shape
    ph = (-h) % block
    pw = (-w) % block
    if ph or pw:
        g = np.pad(g, ((0, ph), (0, pw)), mode="symmetric")
    return g


def _blocks(m: np.ndarray, block: int) -> np.ndarray:
    h, w = m.shape
    return (
        m.reshape(h // block, block, w // block, block)
        .transpose(0, 2, 1, 3)
        .reshape(-1, block, block)
    )


def _edge_impaired(blocks: np.ndarray, seg: int, threshold: float) -> np.ndarray:
    """True where any length-``seg`` run on any block edge is nearly flat."""
    edges = np.stack(
        [blocks[:, 0, :], blocks[:, -1, :], blocks[:, :, 0], blocks[:, :, -1]], axis=1
    )  # (n, 4, block)
    runs = np.lib.stride_tricks.sliding_window_view(edges, seg, axis=2)  # (n, 4, nseg, seg)
    sd = runs.std(axis=-1, ddof=1)
    return (sd < threshold).any(axis=(1, 2))


def _noise_flag(blocks: np.ndarray, block_var: np.ndarray) -> np.ndarray:
    """Gaussian-noise test: centre-vs-surround deviation ratio against block deviation."""
    c1 = blocks.shape[2] // 2 - 1
    centre = blocks[:, :, c1 : c1 + 2].reshape(len(blocks), -1)
    keep = np.ones(blocks.shape[2], dtype=bool)
    keep[c1 : c1 + 2] = False
    surround = blocks[:, :, keep].reshape(len(blocks), -1)
    centre_sd = centre.std(axis=1, ddof=1)
    surround_sd = surround.std(axis=1, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(surround_sd > 0, centre_sd / surround_sd, 0.0)
    sigma = np.sqrt(block_var)
    denom = np.maximum(sigma, ratio)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(denom > 0, np.abs(sigma - ratio) / denom, 0.0)
    return sigma > 2.0 * beta


def piqe_details(g: np.ndarray) -> dict:
    """Score plus per-block masks (active / artifact / noise) for diagnostics."""
    g = check_gray(g, C.PIQE_MIN_DIM)
    block = C.PIQE_BLOCK_SIZE
    m = mscn(_pad_to_blocks(g, block))
    blocks = _blocks(m, block)
    block_var = blocks.reshape(len(blocks), -1).var(axis=1, ddof=1)
    active = block_var >= C.PIQE_ACTIVITY_THRESHOLD
    artifact = np.zeros_like(active)
    noise = np.zeros_like(active)
    if active.any():
        act = blocks[active]
        artifact[active] = _edge_impaired(act, C.PIQE_SEGMENT_LENGTH, C.PIQE_IMPAIRED_THRESHOLD)
        noise[active] = _noise_flag(act, block_var[active])
    dist = np.where(artifact, 1.0 - block_var, 0.0) + np.where(noise, block_var, 0.0)
    n_active = int(active.sum())
    raw = (float(dist[active].sum()) + C.PIQE_C) / (n_active + C.PIQE_C)
    score = float(np.clip(100.0 * raw, C.SCORE_MIN, C.SCORE_MAX))
    return {
        "score": score,
        "n_blocks": len(blocks),
        "n_active": n_active,
        "active": active,
        "artifact": artifact,
        "noise": noise,
    }


def piqe_score(g: np.ndarray) -> float:
    return piqe_details(g)["score"]
