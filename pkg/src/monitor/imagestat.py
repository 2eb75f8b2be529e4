"""Event-level image statistics, image identity hashing and per-post IQA aggregates."""
from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from PIL import Image

from .corpus import Event, ImageRef, Post
from .iqa import IqaScores, QualityModels, score_image
from .iqa.nss import ImageDecodeError, load_image, luminance

logger = logging.getLogger(__name__)

PIXEL = "pixel"
PERCEPTUAL = "perceptual"


def pixel_hash(arr: np.ndarray) -> str:
    """SHA-256 over the 8-bit RGB pixels (and shape), independent of the container format."""
    arr = np.asarray(arr)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    rgb = np.ascontiguousarray(arr[..., :3], dtype=np.uint8)
    h = hashlib.sha256()
    h.update(np.asarray(rgb.shape, dtype="<u4").tobytes())
    h.update(rgb.tobytes())
    return h.hexdigest()


def dhash(arr: np.ndarray, hash_size: int = 8) -> str:
    """64-bit difference hash: sign of horizontal gradients on a 9×8 box-resampled luminance."""
    g = luminance(arr).astype(np.float32)
    small = np.asarray(Image.fromarray(g).resize((hash_size + 1, hash_size), Image.BOX))
    bits = (small[:, 1:] > small[:, :-1]).ravel()
    return "%0*x" % (hash_size * hash_size // 4, int("".join("1" if b else "0" for b in bits), 2))


def hamming(a: str, b: str) -> int:
    """Bit distance between two difference hashes (with or without the ``dhash:`` prefix)."""
    a, b = a.removeprefix("dhash:"), b.removeprefix("dhash:")
    return bin(int(a, 16) ^ int(b, 16)).count("1")


def image_identity(ref: ImageRef | str, mode: str = PIXEL) -> str:
    """Content identity of an image; raises ImageDecodeError for unreadable files."""
    uri = getattr(ref, "uri", ref)
    try:
        arr = load_image(uri)
    except FileNotFoundError as exc:
        raise ImageDecodeError(str(exc)) from exc
    if mode == PIXEL:
        return pixel_hash(arr)
    if mode == PERCEPTUAL:
        return "dhash:" + dhash(arr)
    raise ValueError(f"unknown identity mode {mode!r}")


def cached_identity(mode: str = PIXEL) -> Callable[[str], Optional[str]]:
    memo: dict[str, Optional[str]] = {}

    def ident(uri: str) -> Optional[str]:
        if uri not in memo:
            try:
                memo[uri] = image_identity(uri, mode)
            except ImageDecodeError as exc:
                logger.warning("no identity for %s: %s", uri, exc)
                memo[uri] = None
        return memo[uri]

    return ident


@dataclass(frozen=True)
class ImageStats:
    count_img: int
    ratio_img1: float
    ratio_img2: float
    ratio_img3: float
    top_image: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("top_image")
        return d


IMAGE_STAT_NAMES = ("count_img", "ratio_img1", "ratio_img2", "ratio_img3")


def image_stats(e: Event, identity: Callable[[str], Optional[str]] | None = None) -> ImageStats:
    """Image counts and spread ratios over one event.

    ``ratio_img3`` is the share of identified image occurrences held by the most
    frequent distinct image; undecodable images are left out of that ratio.
    """
    if not e.posts:
        raise ValueError("event has no posts")
    ident = identity or cached_identity(PIXEL)
    n_posts = len(e.posts)
    count = sum(len(p.images) for p in e.posts)
    multi = sum(len(p.images) >= 2 for p in e.posts)
    hashes = [h for p in e.posts for im in p.images if (h := ident(im.uri)) is not None]
    ratio3, top = 0.0, ""
    if hashes:
        freq = Counter(hashes)
        top, n_top = min(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        ratio3 = n_top / len(hashes)
    return ImageStats(count, multi / n_posts, count / n_posts, ratio3, top)


def post_iqa(p: Post, models: QualityModels, cache: dict | None = None) -> IqaScores:
    """Mean of each scorer over the post's images, ignoring images where it is missing."""
    cache = {} if cache is None else cache
    per = []
    for im in p.images:
        if im.uri not in cache:
            cache[im.uri] = score_image(im, models)
        per.append(cache[im.uri])

    def mean(field: str) -> Optional[float]:
        vals = [getattr(s, field) for s in per if getattr(s, field) is not None]
        return float(np.mean(vals)) if vals else None

    return IqaScores(brisque=mean("brisque"), niqe=mean("niqe"), piqe=mean("piqe"))
