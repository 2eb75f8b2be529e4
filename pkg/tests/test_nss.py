import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image
from scipy import ndimage, stats
from scipy.special import gamma as G

from monitor.iqa import constants as C
from monitor.iqa.nss import (
    DegenerateFit,
    ImageDecodeError,
    alpha_table,
    aggd_vector,
    check_gray,
    downsample2,
    fit_aggd,
    fit_ggd,
    gaussian_window,
    ggd_vector,
    luminance,
    mscn,
    nss_features,
    paired_products,
    to_luminance,
)


def aggd_samples(rng, alpha, sigma_l, sigma_r, n):
    """Draw from an AGGD by picking a side with the right mass and a one-sided GGD magnitude."""
    to_scale = np.sqrt(G(1 / alpha) / G(3 / alpha))
    bl, br = sigma_l * to_scale, sigma_r * to_scale
    left = rng.uniform(size=n) < bl / (bl + br)
    mag_l = np.abs(stats.gennorm.rvs(alpha, scale=bl, size=n, random_state=rng))
    mag_r = np.abs(stats.gennorm.rvs(alpha, scale=br, size=n, random_state=rng))
    return np.where(left, -mag_l, mag_r)


# ---------------------------------------------------------------- luminance


def test_white_rgb_is_255(tmp_path):
    p = tmp_path / "w.png"
    Image.fromarray(np.full((8, 8, 3), 255, np.uint8)).save(p)
    assert np.all(to_luminance(p) == pytest.approx(255.0))


def test_pure_red_luminance(tmp_path):
    arr = np.zeros((4, 4, 3), np.uint8)
    arr[..., 0] = 255
    p = tmp_path / "r.png"
    Image.fromarray(arr).save(p)
    assert np.allclose(to_luminance(p), 0.299 * 255)
    assert np.allclose(to_luminance(p), 76.245)


def test_gray_passthrough():
    g = np.arange(12, dtype=np.uint8).reshape(3, 4)
    assert np.array_equal(luminance(g), g.astype(float))


def test_truncated_file_raises(tmp_path):
    p = tmp_path / "t.png"
    Image.fromarray(np.zeros((64, 64), np.uint8) + 7).save(p)
    raw = p.read_bytes()
    p.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ImageDecodeError):
        to_luminance(p)


def test_non_image_raises(tmp_path):
    p = tmp_path / "x.jpg"
    p.write_text("not an image")
    with pytest.raises(ImageDecodeError):
        to_luminance(p)


def test_check_gray_rejects_nonfinite():
    g = np.zeros((40, 40))
    g[3, 3] = np.nan
    with pytest.raises(ValueError):
        check_gray(g)


# ---------------------------------------------------------------- MSCN


def test_window_unit_sum_and_scale():
    w = gaussian_window()
    assert len(w) == 7
    assert np.outer(w, w).sum() == pytest.approx(1.0)
    # oracle: sampled Gaussian density with sigma 7/6, renormalised
    x = np.arange(-3, 4)
    ref = stats.norm.pdf(x, scale=7 / 6)
    assert np.allclose(w, ref / ref.sum())


def test_mscn_constant_is_zero():
    assert np.all(mscn(np.full((50, 60), 93.0)) == 0.0)


def test_mscn_matches_direct_definition(rng):
    g = rng.uniform(0, 255, (20, 23))
    w2 = np.outer(gaussian_window(), gaussian_window())
    # brute force: explicit symmetric padding and window sums per pixel
    pad = np.pad(g, 3, mode="symmetric")
    mu = np.zeros_like(g)
    sd = np.zeros_like(g)
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            patch = pad[i : i + 7, j : j + 7]
            mu[i, j] = (w2 * patch).sum()
            sd[i, j] = np.sqrt(abs((w2 * patch * patch).sum() - mu[i, j] ** 2))
    assert np.allclose(mscn(g), (g - mu) / (sd + 1.0), atol=1e-9)


def test_mscn_mean_near_zero_on_photos(photos):
    for name, g in list(photos.items())[:8]:
        assert abs(mscn(g).mean()) < 0.1, name


def test_mscn_checkerboard_symmetric():
    cb = (np.indices((64, 64)).sum(axis=0) % 2) * 255.0
    m = mscn(cb)
    assert np.any(m != 0)
    hist_pos, _ = np.histogram(m[m > 0], bins=20, range=(0, np.abs(m).max()))
    hist_neg, _ = np.histogram(-m[m < 0], bins=20, range=(0, np.abs(m).max()))
    assert np.array_equal(hist_pos, hist_neg)


def test_downsample_is_box_mean(rng):
    g = rng.uniform(0, 255, (9, 12))
    d = downsample2(g)
    assert d.shape == (4, 6)
    assert d[1, 2] == pytest.approx(g[2:4, 4:6].mean())


# ---------------------------------------------------------------- GGD / AGGD


def test_alpha_table_range():
    a, rho = alpha_table()
    assert a[0] == pytest.approx(0.2) and a[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(a), 0.001)
    assert np.all(np.diff(rho) > 0)  # ratio increases with alpha, so lookup is unique


def test_fit_ggd_gaussian(rng):
    x = rng.normal(0, 1, 100_000)
    p = fit_ggd(x)
    assert 1.9 <= p.alpha <= 2.1
    assert 0.95 <= p.sigma_sq <= 1.05


def test_fit_ggd_laplacian(rng):
    p = fit_ggd(rng.laplace(0, 1, 100_000))
    assert 0.95 <= p.alpha <= 1.05


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.5, 3.0])
def test_fit_ggd_gennorm_oracle(alpha):
    x = stats.gennorm.rvs(alpha, scale=1.3, size=100_000, random_state=np.random.default_rng(int(alpha * 10)))
    p = fit_ggd(x)
    assert p.alpha == pytest.approx(alpha, rel=0.06)
    assert p.sigma_sq == pytest.approx(stats.gennorm.var(alpha, scale=1.3), rel=0.04)


def test_fit_ggd_all_zero():
    with pytest.raises(DegenerateFit):
        fit_ggd(np.zeros(500))
    assert ggd_vector(np.zeros(500)) == [C.DEGENERATE_ALPHA, C.DEGENERATE_EPS]


def test_fit_requires_100_samples():
    with pytest.raises(ValueError):
        fit_ggd(np.ones(99))


def test_fit_aggd_symmetric_gaussian(rng):
    p = fit_aggd(rng.normal(0, 1, 100_000))
    assert abs(p.eta) < 0.02
    assert abs(p.sigma_l_sq - p.sigma_r_sq) < 0.05


def test_fit_aggd_right_skewed(rng):
    x = aggd_samples(rng, 1.2, 0.5, 1.0, 100_000)
    p = fit_aggd(x)
    assert 3.6 <= p.sigma_r_sq / p.sigma_l_sq <= 4.4
    assert p.alpha == pytest.approx(1.2, rel=0.08)
    # the eta term is the distribution mean, so it must track the sample mean
    assert p.eta == pytest.approx(x.mean(), abs=0.01)


def test_fit_aggd_one_sided():
    with pytest.raises(DegenerateFit):
        fit_aggd(np.abs(np.random.default_rng(0).normal(size=300)))
    assert aggd_vector(np.ones(300)) == [0.0, C.DEGENERATE_ALPHA, C.DEGENERATE_EPS, C.DEGENERATE_EPS]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.4, 6.0), st.floats(0.2, 3.0), st.integers(0, 2**31))
def test_fit_ggd_scale_invariant_shape(alpha, scale, seed):
    x = stats.gennorm.rvs(alpha, size=2000, random_state=np.random.default_rng(seed))
    a = fit_ggd(x)
    b = fit_ggd(scale * x)
    assert a.alpha == b.alpha
    assert b.sigma_sq == pytest.approx(scale**2 * a.sigma_sq, rel=1e-9)
    assert C.ALPHA_MIN <= a.alpha <= C.ALPHA_MAX


# ---------------------------------------------------------------- feature layout


def test_paired_products_orientations():
    m = np.arange(12.0).reshape(3, 4)
    h, v, d1, d2 = paired_products(m)
    assert h[1, 1] == m[1, 1] * m[1, 2]
    assert v[1, 1] == m[1, 1] * m[2, 1]
    assert d1[1, 1] == m[1, 1] * m[2, 2]
    assert d2[1, 1] == m[1, 2] * m[2, 1]  # (i, j) with (i+1, j-1)


def test_nss_features_constant_is_substituted():
    f = nss_features(np.zeros((40, 40)))
    assert f.shape == (18,)
    assert np.all(np.isfinite(f))
    assert f[0] == C.DEGENERATE_ALPHA


def test_scipy_reflect_is_symmetric_padding():
    # the filter mode used for local statistics repeats the edge sample (d c b a | a b c d)
    x = np.array([1.0, 2.0, 3.0])
    out = ndimage.correlate1d(x, np.array([1.0, 0.0, 0.0]), mode="reflect")
    assert out[0] == 1.0
