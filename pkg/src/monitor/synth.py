"""Procedural scenes, image distortions and synthetic corpora.

Scenes follow a dead-leaves occlusion model (power-law leaf sizes, shaded
leaves with oriented 1/f texture, mild optical blur). Their local statistics
are close enough to photographs to calibrate the quality scorers without
shipping third-party photos.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage


def _oriented_noise(
    shape: tuple[int, int], rng: np.random.Generator, exponent: float, theta: float, aniso: float
) -> np.ndarray:
    """Unit-variance 1/f^exponent noise stretched by ``aniso`` along direction ``theta``."""
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.rfftfreq(w)[None, :]
    u = fx * np.cos(theta) + fy * np.sin(theta)
    v = -fx * np.sin(theta) + fy * np.cos(theta)
    f = np.sqrt(u * u + (aniso * v) ** 2)
    f[0, 0] = 1.0
    spec = (rng.normal(size=f.shape) + 1j * rng.normal(size=f.shape)) / f**exponent
    spec[0, 0] = 0.0
    out = np.fft.irfft2(spec, s=shape)
    return out / (out.std() + 1e-12)


def scene(size: int | tuple[int, int] = 256, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Return a gray scene in [0, 255] (float64) drawn from the dead-leaves model.

    Leaves are discs or (mostly axis-aligned) rectangles, each carrying a
    linear shading ramp and one of a few oriented textures at its own contrast.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    h, w = (size, size) if isinstance(size, int) else size
    n_tex = 8
    lo, hi = np.log(0.3), np.log(25.0)
    tex = np.stack([
        _oriented_noise((h, w), rng, rng.uniform(1.0, 1.4), rng.uniform(0, np.pi), rng.uniform(1.0, 6.0))
        for _ in range(n_tex)
    ])
    img = np.full((h, w), rng.uniform(60, 190))
    gain = np.full((h, w), np.exp(rng.uniform(lo, hi)))
    tex_id = np.zeros((h, w), dtype=np.intp)
    covered = np.zeros((h, w), dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    rmin, rmax = 3.0, max(h, w) / 2.5
    # painted front-to-back: each pixel keeps the first leaf that covers it
    for _ in range(4000):
        u = rng.uniform()
        r = rmin * rmax / (rmax - u * (rmax - rmin))  # density ~ r^-2 on [rmin, rmax]
        cy, cx = rng.uniform(-r, h + r), rng.uniform(-r, w + r)
        y0, y1 = max(int(cy - r), 0), min(int(cy + r) + 1, h)
        x0, x1 = max(int(cx - r), 0), min(int(cx + r) + 1, w)
        if y0 >= y1 or x0 >= x1:
            continue
        dy = yy[y0:y1, x0:x1] - cy
        dx = xx[y0:y1, x0:x1] - cx
        if rng.uniform() < 0.4:
            t = rng.choice([0.0, np.pi / 2, rng.uniform(0, np.pi)], p=[0.4, 0.4, 0.2])
            aspect = rng.uniform(0.3, 1.0)
            pu = dx * np.cos(t) + dy * np.sin(t)
            pv = -dx * np.sin(t) + dy * np.cos(t)
            sub = (np.abs(pu) <= r) & (np.abs(pv) <= aspect * r)
        else:
            sub = dx * dx + dy * dy <= r * r
        sub &= ~covered[y0:y1, x0:x1]
        if not sub.any():
            continue
        base = rng.uniform(15, 240)
        gy, gx = rng.normal(0, 25.0 / r, size=2)
        img[y0:y1, x0:x1][sub] = (base + gy * dy + gx * dx)[sub]
        gain[y0:y1, x0:x1][sub] = np.exp(rng.uniform(lo, hi))
        tex_id[y0:y1, x0:x1][sub] = rng.integers(n_tex)
        covered[y0:y1, x0:x1] |= sub
        if covered.all():
            break
    img += gain * np.take_along_axis(tex, tex_id[None], axis=0)[0]
    img = ndimage.gaussian_filter(img, rng.uniform(0.3, 0.5), mode="reflect")
    return quantize(img)


def quantize(g: np.ndarray) -> np.ndarray:
    return np.clip(np.round(g), 0, 255)


def add_noise(g: np.ndarray, sigma: float, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Additive white Gaussian noise; ``sigma`` is on the 0–255 scale."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return quantize(g + rng.normal(0.0, sigma, g.shape))


def blur(g: np.ndarray, radius: float) -> np.ndarray:
    return quantize(ndimage.gaussian_filter(np.asarray(g, dtype=np.float64), radius, mode="reflect"))


def jpeg(g: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    Image.fromarray(quantize(g).astype(np.uint8)).save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    with Image.open(buf) as im:
        return np.asarray(im.convert("L"), dtype=np.float64)


# (kind, parameter, severity level); level 0 is pristine
DISTORTIONS: list[tuple[str, float, int]] = [
    ("clean", 0.0, 0),
    ("noise", 10.0, 1),
    ("noise", 25.0, 2),
    ("noise", 50.0, 3),
    ("blur", 1.0, 1),
    ("blur", 2.0, 2),
    ("blur", 4.0, 3),
    ("jpeg", 80, 1),
    ("jpeg", 40, 2),
    ("jpeg", 10, 3),
]


def distort(g: np.ndarray, kind: str, param: float, seed: int = 0) -> np.ndarray:
    if kind == "clean":
        return quantize(g)
    if kind == "noise":
        return add_noise(g, param, seed)
    if kind == "blur":
        return blur(g, param)
    if kind == "jpeg":
        return jpeg(g, int(param))
    raise ValueError(f"unknown distortion {kind!r}")


def distortion_corpus(images: list[np.ndarray], seed: int = 0) -> list[tuple[np.ndarray, float]]:
    """Every image under every entry of ``DISTORTIONS`` paired with its severity level."""
    out = []
    for i, g in enumerate(images):
        for j, (kind, param, level) in enumerate(DISTORTIONS):
            out.append((distort(g, kind, param, seed=seed * 100003 + i * 101 + j), float(level)))
    return out


def save_gray(g: np.ndarray, path: str | Path, quality: int | None = None) -> None:
    im = Image.fromarray(quantize(g).astype(np.uint8))
    if quality is None:
        im.save(path)
    else:
        im.save(path, quality=quality)


def write_pristine_dir(out_dir: str | Path, n: int = 24, size: int = 256, seed: int = 0) -> list[Path]:
    """Write ``n`` procedural pristine scenes as PNG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ss = np.random.SeedSequence(seed)
    paths = []
    for i, child in enumerate(ss.spawn(n)):
        p = out_dir / f"scene_{i:03d}.png"
        save_gray(scene(size, np.random.default_rng(child)), p)
        paths.append(p)
    return paths


def pristine_scenes(n: int, size: int, seed: int = 0) -> list[np.ndarray]:
    ss = np.random.SeedSequence(seed)
    return [scene(size, np.random.default_rng(child)) for child in ss.spawn(n)]


def default_calibration(seed: int = 0):
    """Recipe for the bundled IQA models: NIQE on 40 scenes of 384 px, BRISQUE on 20 of 256 px."""
    from .iqa import calibrate

    niqe_set = pristine_scenes(40, 384, seed)
    brisque_set = pristine_scenes(20, 256, seed + 1)
    return calibrate(niqe_set, seed=seed, brisque_pristine=brisque_set)
