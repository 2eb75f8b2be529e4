"""Natural-scene-statistics primitives shared by BRISQUE and NIQE.

Gray images are plain 2-D ``float64`` arrays with luminance in [0, 255].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from . import constants as C

logger = logging.getLogger(__name__)


class ImageDecodeError(ValueError):
    """Raised when an image file cannot be decoded."""


class ImageTooSmall(ValueError):
    """Raised when an image is below a scorer's minimum size."""


class DegenerateFit(ValueError):
    """Raised when a distribution fit has no usable spread (e.g. all-zero samples)."""


@dataclass(frozen=True)
class GgdParams:
    alpha: float
    sigma_sq: float


@dataclass(frozen=True)
class AggdParams:
    alpha: float
    sigma_l_sq: float
    sigma_r_sq: float
    eta: float


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/JPEG file into an ``uint8`` array (H×W or H×W×3)."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "RGB"):
                arr = np.asarray(im)
            elif im.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im.convert("L"))
            else:
                arr = np.asarray(im.convert("RGB"))
    except (OSError, UnidentifiedImageError, ValueError, SyntaxError) as exc:
        raise ImageDecodeError(f"cannot decode image {path}: {exc}") from exc
    return np.ascontiguousarray(arr)


def luminance(arr: np.ndarray) -> np.ndarray:
    """Convert an RGB or grayscale array to a float luminance image."""
    arr = np.asarray(arr)
    if arr.ndim == 2:
        return arr.astype(np.float64)
    if arr.ndim == 3 and arr.shape[2] >= 3:
        w = np.asarray(C.LUMA_WEIGHTS)
        return arr[..., :3].astype(np.float64) @ w
    raise ValueError(f"unsupported image shape {arr.shape}")


def to_luminance(path: str | Path) -> np.ndarray:
    return luminance(load_image(path))


def check_gray(g: np.ndarray, min_dim: int = 1) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {g.shape}")
    if min(g.shape) < min_dim:
        raise ImageTooSmall(f"image {g.shape} smaller than {min_dim} pixels")
    if not np.all(np.isfinite(g)):
        raise ValueError("image contains non-finite values")
    return g


def gaussian_window(size: int = C.WINDOW_SIZE, sigma: float = C.WINDOW_SIGMA) -> np.ndarray:
    """1-D Gaussian taps; the 2-D circular window is their outer product (unit sum)."""
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def local_mean_std(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = gaussian_window()
    mu = ndimage.correlate1d(g, w, axis=0, mode="reflect")
    mu = ndimage.correlate1d(mu, w, axis=1, mode="reflect")
    ex2 = ndimage.correlate1d(g * g, w, axis=0, mode="reflect")
    ex2 = ndimage.correlate1d(ex2, w, axis=1, mode="reflect")
    sigma = np.sqrt(np.abs(ex2 - mu * mu))
    return mu, sigma


def mscn(g: np.ndarray, return_sigma: bool = False):
    """Mean-subtracted contrast-normalised coefficients of a gray image."""
    g = check_gray(g)
    mu, sigma = local_mean_std(g)
    coef = (g - mu) / (sigma + C.MSCN_C)
    # flat regions leave float round-off residue; snap it to exact zero
    coef[np.abs(coef) < 1e-9] = 0.0
    if return_sigma:
        return coef, sigma
    return coef


def downsample2(g: np.ndarray) -> np.ndarray:
    """Half-resolution bilinear resample (pixel-centre aligned, i.e. a 2×2 box mean)."""
    h, w = g.shape
    g = g[: h - h % 2, : w - w % 2]
    return 0.25 * (g[0::2, 0::2] + g[1::2, 0::2] + g[0::2, 1::2] + g[1::2, 1::2])


_ALPHAS = np.round(
    np.linspace(C.ALPHA_MIN, C.ALPHA_MAX, int(round((C.ALPHA_MAX - C.ALPHA_MIN) / C.ALPHA_STEP)) + 1), 6
)
_RHO_TABLE = gamma_fn(2.0 / _ALPHAS) ** 2 / (gamma_fn(1.0 / _ALPHAS) * gamma_fn(3.0 / _ALPHAS))


def alpha_table() -> tuple[np.ndarray, np.ndarray]:
    """Return the (alpha grid, generalized-Gaussian ratio) lookup table."""
    return _ALPHAS.copy(), _RHO_TABLE.copy()


def _lookup_alpha(ratio: float) -> float:
    return float(_ALPHAS[np.argmin(np.abs(_RHO_TABLE - ratio))])


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < C.MIN_FIT_SAMPLES:
        raise ValueError(f"need at least {C.MIN_FIT_SAMPLES} samples, got {x.size}")
    return x


def fit_ggd(samples) -> GgdParams:
    """Moment-matching fit of a zero-mean generalized Gaussian."""
    x = _as_samples(samples)
    mean_sq = float(np.mean(x * x))
    if mean_sq <= 0.0:
        raise DegenerateFit("all-zero samples")
    rho = float(np.mean(np.abs(x))) ** 2 / mean_sq
    return GgdParams(alpha=_lookup_alpha(rho), sigma_sq=mean_sq)


def fit_aggd(samples) -> AggdParams:
    """Moment-matching fit of an asymmetric generalized Gaussian."""
    x = _as_samples(samples)
    left = x[x < 0]
    right = x[x > 0]
    if left.size == 0 or right.size == 0:
        raise DegenerateFit("samples lack a negative or a positive side")
    sl_sq = float(np.mean(left * left))
    sr_sq = float(np.mean(right * right))
    sl, sr = np.sqrt(sl_sq), np.sqrt(sr_sq)
    g = sl / sr
    r_hat = float(np.mean(np.abs(x))) ** 2 / float(np.mean(x * x))
    big_r = r_hat * (g**3 + 1) * (g + 1) / (g**2 + 1) ** 2
    alpha = _lookup_alpha(big_r)
    # convert side standard deviations to AGGD scale parameters before taking the mean
    to_scale = np.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    eta = (sr - sl) * to_scale * gamma_fn(2.0 / alpha) / gamma_fn(1.0 / alpha)
    return AggdParams(alpha=alpha, sigma_l_sq=sl_sq, sigma_r_sq=sr_sq, eta=float(eta))


def ggd_vector(samples) -> list[float]:
    try:
        p = fit_ggd(samples)
    except DegenerateFit:
        return [C.DEGENERATE_ALPHA, C.DEGENERATE_EPS]
    return [p.alpha, p.sigma_sq]


def aggd_vector(samples) -> list[float]:
    try:
        p = fit_aggd(samples)
    except DegenerateFit:
        return [0.0, C.DEGENERATE_ALPHA, C.DEGENERATE_EPS, C.DEGENERATE_EPS]
    return [p.eta, p.alpha, p.sigma_l_sq, p.sigma_r_sq]


def paired_products(m: np.ndarray) -> tuple[np.ndarray, ...]:
    """Neighbour products in H, V, D1, D2 order over the valid (non-wrapping) region."""
    h = m[:, :-1] * m[:, 1:]
    v = m[:-1, :] * m[1:, :]
    d1 = m[:-1, :-1] * m[1:, 1:]
    d2 = m[:-1, 1:] * m[1:, :-1]
    return h, v, d1, d2


def nss_features(m: np.ndarray) -> np.ndarray:
    """18 features of one MSCN field: GGD (alpha, sigma²) then 4 × AGGD (eta, alpha, σl², σr²)."""
    feats = ggd_vector(m)
    for prod in paired_products(m):
        feats.extend(aggd_vector(prod))
    return np.asarray(feats, dtype=np.float64)
