"""Generators for the bundled toy corpus and the synthetic multimodal corpus."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .corpus import ImageRef, Label, Post, UserProfile, write_posts
from .synth import add_noise, save_gray, scene

FILLER = (
    "city river morning street photo people today news water bridge market road train storm crowd "
    "park square building night video station airport harbour village coast town hill field weather "
    "report update scene event traffic police museum school bus"
).split()
FAKE_WORDS = ("shocking", "hoax", "fake", "unbelievable", "scary", "lies", "conspiracy")
REAL_WORDS = ("official", "confirmed", "statement", "according", "agency", "reported", "verified")

IMAGE_SIZE = 192


def toy_corpus_path() -> Path:
    return Path(str(resources.files("monitor") / "data" / "toy" / "posts.jsonl"))


def _user(rng: np.random.Generator) -> UserProfile:
    followers = int(rng.lognormal(5, 2))
    return UserProfile(
        followers=followers,
        friends=int(rng.lognormal(5, 1.5)),
        statuses_posted=int(rng.lognormal(7, 1.5)),
        favourites=int(rng.lognormal(5, 2)),
        times_listed=int(rng.poisson(3)),
        verified=bool(rng.uniform() < 0.1),
        has_profile_image=bool(rng.uniform() < 0.8),
        has_homepage_url=bool(rng.uniform() < 0.4),
    )


def _filler(rng, n: int) -> list[str]:
    return [str(w) for w in rng.choice(FILLER, size=n)]


def make_toy_corpus(out_dir: str | Path, seed: int = 7) -> Path:
    """40 posts over 14 single-label events, with split flags and images (some shared).

    Fake events use alarmist wording, exclamation marks and noisy images;
    real events use reporting vocabulary and clean images.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    sizes = [3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 2, 3, 3, 2]  # 40 posts
    test_events = {3, 8, 12}
    posts = []
    for ev, n_posts in enumerate(sizes):
        fake = ev % 2 == 0
        pool = []
        for j in range(2):
            g = scene(IMAGE_SIZE, rng)
            if fake:
                g = add_noise(g, rng.uniform(35, 50), rng)
            p = out / "images" / f"e{ev:02d}_{j}.png"
            save_gray(g, p)
            pool.append(p)
        for k in range(n_posts):
            words = _filler(rng, int(rng.integers(5, 12)))
            cue = FAKE_WORDS if fake else REAL_WORDS
            for w in rng.choice(cue, size=2, replace=False):
                words.insert(int(rng.integers(0, len(words) + 1)), str(w))
            text = " ".join(words)
            text = text[0].upper() + text[1:]
            text += "!!!" if fake else "."
            n_img = 2 if k == 0 and n_posts == 3 else 1
            imgs = tuple(ImageRef(str(pool[i])) for i in ([0, 1] if n_img == 2 else [int(rng.integers(2))]))
            posts.append(Post(
                id=f"toy{ev:02d}{k}", event_id=f"event{ev:02d}", text=text, user=_user(rng),
                retweets=int(rng.poisson(20)), likes=int(rng.poisson(40)), images=imgs,
                label=Label.FAKE if fake else Label.REAL, language="en",
                split="test" if ev in test_events else "train",
            ))
    path = out / "posts.jsonl"
    write_posts(posts, path, base_dir=out)
    return path


def make_synthetic_corpus(
    out_dir: str | Path, n_events: int = 100, posts_per_event: int = 4, seed: int = 0, noise: float = 0.3
) -> Path:
    """Multimodal corpus whose label depends on one textual and one visual signal.

    Each post draws independent standard normals ``s_t`` and ``s_i``; it is fake
    when ``s_t + s_i + noise * e > 0``. ``s_t`` sets the number of exclamation
    marks, ``s_i`` the Gaussian noise level of the post's image. Every other
    field is label-independent.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    posts = []
    for ev in range(n_events):
        for k in range(posts_per_event):
            s_t, s_i, e = rng.normal(size=3)
            fake = s_t + s_i + noise * e > 0
            n_excl = int(np.clip(np.round(2.0 * s_t + 4.0), 0, 8))
            words = _filler(rng, int(rng.integers(6, 20)))
            text = " ".join(words)
            text = text[0].upper() + text[1:] + "."
            if n_excl:
                text += " " + "!" * n_excl
            sigma = 40.0 * float(ndtr(s_i))
            g = add_noise(scene(IMAGE_SIZE, rng), sigma, rng)
            p = out / "images" / f"s{ev:03d}_{k}.png"
            save_gray(g, p)
            posts.append(Post(
                id=f"syn{ev:03d}_{k}", event_id=f"sev{ev:03d}", text=text, user=_user(rng),
                retweets=int(rng.poisson(20)), likes=int(rng.poisson(40)), images=(ImageRef(str(p)),),
                label=Label.FAKE if fake else Label.REAL, language="en",
            ))
    path = out / "posts.jsonl"
    write_posts(posts, path, base_dir=out)
    return path
