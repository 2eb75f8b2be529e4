"""NIQE: distance between an image's patch statistics and a pristine MVG model."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import constants as C
from .nss import ImageTooSmall, check_gray, downsample2, mscn, nss_features

FORMAT = "monitor-niqe-mvg"
VERSION = 1


@dataclass(frozen=True)
class MvgModel:
    mean: np.ndarray
    cov: np.ndarray
    patch_size: int = C.NIQE_PATCH_SIZE
    sharpness_fraction: float = C.NIQE_SHARPNESS_FRACTION
    n_images: int = 0
    n_patches: int = 0

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "patch_size": self.patch_size,
            "sharpness_fraction": self.sharpness_fraction,
            "n_images": self.n_images,
            "n_patches": self.n_patches,
            "mean": [float(v) for v in self.mean],
            "cov": [[float(v) for v in row] for row in self.cov],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MvgModel":
        if d.get("format") != FORMAT:
            raise ValueError(f"not a NIQE model file (format={d.get('format')!r})")
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported NIQE model version {d.get('version')}")
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            cov=np.asarray(d["cov"], dtype=np.float64),
            patch_size=int(d["patch_size"]),
            sharpness_fraction=float(d["sharpness_fraction"]),
            n_images=int(d.get("n_images", 0)),
            n_patches=int(d.get("n_patches", 0)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MvgModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _tile(a: np.ndarray, p: int) -> np.ndarray:
    h, w = a.shape
    return a.reshape(h // p, p, w // p, p).transpose(0, 2, 1, 3).reshape(-1, p, p)


def patch_features(
    g: np.ndarray,
    patch_size: int = C.NIQE_PATCH_SIZE,
    sharpness_fraction: float | None = C.NIQE_SHARPNESS_FRACTION,
) -> np.ndarray:
    """36-dim NSS features for each (selected) non-overlapping patch, shape (n, 36).

    Patches are selected on scale-1 sharpness (mean local deviation); the
    scale-2 patch covering the same region is kept alongside. With
    ``sharpness_fraction=None`` every patch is returned.
    """
    g = check_gray(g)
    h, w = g.shape
    if h < patch_size or w < patch_size:
        raise ImageTooSmall(f"image {g.shape} smaller than one {patch_size}px patch")
    g = g[: h - h % patch_size, : w - w % patch_size]
    m1, sigma = mscn(g, return_sigma=True)
    m2 = mscn(downsample2(g))
    p1 = _tile(m1, patch_size)
    p2 = _tile(m2, patch_size // 2)
    sharp = _tile(sigma, patch_size).mean(axis=(1, 2))
    if sharpness_fraction is None:
        keep = np.arange(len(p1))
    else:
        keep = np.flatnonzero(sharp > max(sharpness_fraction * sharp.max(), C.NIQE_MIN_SHARPNESS))
    feats = [np.concatenate([nss_features(p1[i]), nss_features(p2[i])]) for i in keep]
    return np.asarray(feats, dtype=np.float64).reshape(len(keep), C.N_FEATURES)


def _mvg(feats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = feats.mean(axis=0)
    if len(feats) < 2:
        return mu, np.zeros((feats.shape[1], feats.shape[1]))
    cov = np.cov(feats, rowvar=False)
    return mu, 0.5 * (cov + cov.T)


def niqe_fit_pristine(
    corpus: list[np.ndarray],
    patch_size: int = C.NIQE_PATCH_SIZE,
    sharpness_fraction: float = C.NIQE_SHARPNESS_FRACTION,
    min_images: int = C.NIQE_MIN_PRISTINE_IMAGES,
) -> MvgModel:
    if len(corpus) < min_images:
        raise ValueError(f"need at least {min_images} pristine images, got {len(corpus)}")
    pooled = [patch_features(g, patch_size, sharpness_fraction) for g in corpus]
    feats = np.vstack(pooled)
    if len(feats) == 0:
        raise ValueError("no patch passed the sharpness selection; corpus has no sharp content")
    mu, cov = _mvg(feats)
    return MvgModel(mu, cov, patch_size, sharpness_fraction, n_images=len(corpus), n_patches=len(feats))


def mvg_distance(mu1: np.ndarray, cov1: np.ndarray, mu2: np.ndarray, cov2: np.ndarray) -> float:
    d = np.asarray(mu1, dtype=np.float64) - np.asarray(mu2, dtype=np.float64)
    pooled = 0.5 * (np.asarray(cov1) + np.asarray(cov2))
    try:
        if np.linalg.cond(pooled) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned")
        x = np.linalg.solve(pooled, d)
    except np.linalg.LinAlgError:
        x = np.linalg.pinv(pooled) @ d
    return float(np.sqrt(max(float(d @ x), 0.0)))


def niqe_score(g: np.ndarray, m: MvgModel) -> float:
    """Distance of the image's patch MVG from the pristine model (0 = pristine-like).

    Sharpness selection applies to the pristine fit only; scoring uses every
    patch so the image's own covariance is estimated from all of it.
    """
    mu, cov = _mvg(patch_features(g, m.patch_size, None))
    return mvg_distance(m.mean, m.cov, mu, cov)
