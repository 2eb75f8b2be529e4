"""No-reference image quality scorers (BRISQUE, NIQE, PIQE)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import constants
from .brisque import BrisqueModel, brisque_features, brisque_score, train_brisque_model
from .niqe import MvgModel, mvg_distance, niqe_fit_pristine, niqe_score, patch_features
from .nss import (
    AggdParams,
    DegenerateFit,
    GgdParams,
    ImageDecodeError,
    ImageTooSmall,
    fit_aggd,
    fit_ggd,
    load_image,
    luminance,
    mscn,
    to_luminance,
)
from .piqe import piqe_score

logger = logging.getLogger(__name__)

BRISQUE_MODEL_FILE = "brisque.json"
NIQE_MODEL_FILE = "niqe.json"


@dataclass(frozen=True)
class IqaScores:
    brisque: Optional[float] = None
    niqe: Optional[float] = None
    piqe: Optional[float] = None


@dataclass(frozen=True)
class QualityModels:
    brisque: BrisqueModel
    niqe: MvgModel

    @classmethod
    def load(cls, model_dir: str | Path) -> "QualityModels":
        model_dir = Path(model_dir)
        return cls(
            brisque=BrisqueModel.load(model_dir / BRISQUE_MODEL_FILE),
            niqe=MvgModel.load(model_dir / NIQE_MODEL_FILE),
        )

    def save(self, model_dir: str | Path) -> None:
        model_dir = Path(model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        self.brisque.save(model_dir / BRISQUE_MODEL_FILE)
        self.niqe.save(model_dir / NIQE_MODEL_FILE)


_DEFAULT: QualityModels | None = None


def default_model_dir() -> Path:
    return Path(str(resources.files("monitor") / "data" / "models"))


def load_default_models() -> QualityModels:
    """Bundled models calibrated on procedural pristine scenes (see ``monitor calibrate``)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = QualityModels.load(default_model_dir())
    return _DEFAULT


def _safe(fn, *args) -> Optional[float]:
    try:
        v = float(fn(*args))
    except (ImageTooSmall, DegenerateFit) as exc:
        logger.debug("scorer %s skipped: %s", getattr(fn, "__name__", fn), exc)
        return None
    return v if np.isfinite(v) else None


def score_gray(g: np.ndarray, models: QualityModels) -> IqaScores:
    return IqaScores(
        brisque=_safe(brisque_score, g, models.brisque),
        niqe=_safe(niqe_score, g, models.niqe),
        piqe=_safe(piqe_score, g),
    )


def score_image(ref, models: QualityModels | None = None) -> IqaScores:
    """Score one image file; fields are missing where a scorer's preconditions fail."""
    uri = getattr(ref, "uri", ref)
    models = models or load_default_models()
    try:
        g = to_luminance(uri)
    except (ImageDecodeError, FileNotFoundError) as exc:
        logger.warning("image unusable: %s", exc)
        return IqaScores()
    return score_gray(g, models)


def calibrate(
    pristine: list[np.ndarray], seed: int = 0, brisque_pristine: list[np.ndarray] | None = None
) -> QualityModels:
    """Fit both models from pristine gray images.

    BRISQUE learns on synthetic noise/blur/JPEG versions of ``brisque_pristine``
    (default: ``pristine``); NIQE fits its MVG on the sharp patches of ``pristine``.
    """
    from ..synth import distortion_corpus

    src = pristine if brisque_pristine is None else brisque_pristine
    bm = train_brisque_model(distortion_corpus(src, seed=seed), seed=seed)
    nm = niqe_fit_pristine(pristine)
    return QualityModels(brisque=bm, niqe=nm)


def calibrate_dir(image_dir: str | Path, seed: int = 0) -> QualityModels:
    paths = sorted(p for p in Path(image_dir).iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg"))
    pristine = []
    for p in paths:
        try:
            pristine.append(to_luminance(p))
        except ImageDecodeError as exc:
            logger.warning("skipping %s: %s", p, exc)
    return calibrate(pristine, seed=seed)


__all__ = [
    "AggdParams",
    "BrisqueModel",
    "DegenerateFit",
    "GgdParams",
    "ImageDecodeError",
    "ImageTooSmall",
    "IqaScores",
    "MvgModel",
    "QualityModels",
    "brisque_features",
    "brisque_score",
    "calibrate",
    "calibrate_dir",
    "constants",
    "fit_aggd",
    "fit_ggd",
    "load_default_models",
    "load_image",
    "luminance",
    "mscn",
    "mvg_distance",
    "niqe_fit_pristine",
    "niqe_score",
    "patch_features",
    "piqe_score",
    "score_gray",
    "score_image",
    "to_luminance",
    "train_brisque_model",
]
