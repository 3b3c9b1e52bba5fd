import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.fft import dct

from compressible.distributions import DistributionModel, parse_distribution
from compressible.errors import DomainError
from compressible.transforms import (
    DB4_HIGHPASS,
    DB4_LOWPASS,
    MODEL_PRESETS,
    PatchSet,
    average_sorted_magnitudes,
    dct2,
    dwt2_db4,
    expected_order_statistics,
    idct2,
    idwt2_db4,
    iid_patch_set,
    load_patch_set,
    model_curves,
    read_pgm,
    sample_patches,
    sorted_magnitudes,
    transform,
    write_pgm,
)

patches = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).standard_normal((16, 16)))


def periodic_analysis(v, h, g):
    """One periodic filter bank level written as explicit sums."""
    n = len(v)
    lo = [sum(h[j] * v[(2 * i + j) % n] for j in range(4)) for i in range(n // 2)]
    hi = [sum(g[j] * v[(2 * i + j) % n] for j in range(4)) for i in range(n // 2)]
    return np.array(lo + hi)


def reference_dwt2(a):
    a = a.copy()
    side = a.shape[0]
    while side >= 2:
        block = a[:side, :side]
        block = np.array([periodic_analysis(r, DB4_LOWPASS, DB4_HIGHPASS) for r in block])
        block = np.array([periodic_analysis(c, DB4_LOWPASS, DB4_HIGHPASS) for c in block.T]).T
        a[:side, :side] = block
        side //= 2
    return a


def test_db4_filter_conditions():
    h = DB4_LOWPASS
    assert h.sum() == pytest.approx(math.sqrt(2), abs=1e-15)
    assert (h**2).sum() == pytest.approx(1, abs=1e-15)
    assert h[0] * h[2] + h[1] * h[3] == pytest.approx(0, abs=1e-15)
    assert DB4_HIGHPASS.sum() == pytest.approx(0, abs=1e-15)
    # two vanishing moments
    assert (np.arange(4) * DB4_HIGHPASS).sum() == pytest.approx(0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(patches)
def test_dct_parseval_and_roundtrip(p):
    c = dct2(p)
    assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(p), abs=1e-10)
    assert np.allclose(idct2(c), p, atol=1e-10)


def test_dct_matches_separable_1d():
    p = np.random.default_rng(0).standard_normal((8, 8))
    ref = dct(dct(p, axis=0, norm="ortho"), axis=1, norm="ortho")
    assert np.allclose(dct2(p), ref, atol=1e-13)


def test_dct_constant_patch():
    c = dct2(np.full((8, 8), 0.3))
    assert c[0, 0] == pytest.approx(0.3 * 8)
    assert np.count_nonzero(np.abs(c) > 1e-12) == 1


@pytest.mark.parametrize("bad", [np.ones((4, 6)), np.ones(8), np.ones((1, 1))])
def test_non_square_rejected(bad):
    with pytest.raises(DomainError):
        dct2(bad)


@settings(max_examples=20, deadline=None)
@given(patches)
def test_dwt_parseval_and_roundtrip(p):
    c = dwt2_db4(p)
    assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(p), abs=1e-10)
    assert np.allclose(idwt2_db4(c), p, atol=1e-10)


@pytest.mark.parametrize("side", [4, 8, 16])
def test_dwt_matches_explicit_sums(side):
    p = np.random.default_rng(side).standard_normal((side, side))
    assert np.allclose(dwt2_db4(p), reference_dwt2(p), atol=1e-12)


def test_dwt_partial_levels_roundtrip():
    p = np.random.default_rng(1).standard_normal((16, 16))
    c = dwt2_db4(p, levels=2)
    assert np.allclose(idwt2_db4(c, levels=2), p, atol=1e-12)
    assert not np.allclose(c, dwt2_db4(p))


def test_dwt_constant_in_coarsest_band():
    c = dwt2_db4(np.full((16, 16), 2.0))
    assert c[0, 0] == pytest.approx(2.0 * 16)
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-12


def test_dwt_divisibility():
    with pytest.raises(DomainError):
        dwt2_db4(np.ones((12, 12)), levels=3)
    with pytest.raises(DomainError):
        dwt2_db4(np.ones((6, 6)))


def test_transform_dispatch():
    p = np.random.default_rng(2).standard_normal((8, 8))
    assert np.array_equal(transform(p, "dct"), dct2(p))
    assert np.array_equal(transform(p, "db4"), dwt2_db4(p))
    assert np.array_equal(transform(p, "identity"), p)
    with pytest.raises(DomainError):
        transform(p, "haar")


def test_pgm_roundtrip(tmp_path):
    img = np.random.default_rng(3).integers(0, 256, (20, 33))
    path = tmp_path / "a.pgm"
    write_pgm(path, img / 255.0)
    back = read_pgm(path)
    assert back.shape == (20, 33)
    assert np.allclose(back * 255, img)
    assert back.min() >= 0 and back.max() <= 1


def test_pgm_with_comment_and_16_bit(tmp_path):
    path = tmp_path / "b.pgm"
    raster = np.array([[0, 1000], [65535, 7]], dtype=">u2")
    path.write_bytes(b"P5\n# made by hand\n2 2\n65535\n" + raster.tobytes())
    assert np.allclose(read_pgm(path), raster / 65535)


def test_pgm_rejects_other_formats(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
    with pytest.raises(DomainError):
        read_pgm(path)


def test_sample_patches_deterministic(tmp_path):
    rng = np.random.default_rng(4)
    for i in range(2):
        write_pgm(tmp_path / f"{i}.pgm", rng.random((40, 50)))
    a = load_patch_set(tmp_path, 8, 30, seed=5)
    b = load_patch_set(tmp_path, 8, 30, seed=5)
    assert len(a) == 30 and a.side == 8
    assert np.array_equal(a.patches, b.patches)
    assert a.patches.min() >= 0 and a.patches.max() <= 1


def test_sample_patches_errors(tmp_path):
    with pytest.raises(DomainError):
        sample_patches([np.zeros((4, 4))], 8, 3, 0)
    with pytest.raises(DomainError):
        sample_patches([np.zeros((40, 40))], 6, 3, 0)
    with pytest.raises(DomainError):
        load_patch_set(tmp_path, 8, 3, 0)


def test_single_and_duplicated_patch():
    p = np.random.default_rng(6).random((8, 8))
    one = average_sorted_magnitudes(PatchSet(p[None], "x", 0), "dct")
    assert np.allclose(one.values, sorted_magnitudes(dct2(p)))
    two = average_sorted_magnitudes(PatchSet(np.stack([p, p]), "x", 0), "dct")
    assert np.allclose(one.values, two.values, rtol=1e-15)
    assert list(one.ranks) == list(range(1, 65))


@pytest.mark.parametrize("kind", ["dct", "db4", "identity"])
def test_empirical_curve_monotone(kind):
    ps = iid_patch_set(DistributionModel.laplace(), 8, 20, seed=1)
    c = average_sorted_magnitudes(ps, kind)
    assert np.all(np.diff(c.values) <= 0) and np.all(c.values >= 0)


def test_laplace_n1_is_ln2():
    c = expected_order_statistics(DistributionModel.laplace(), 1)
    assert c.values[0] == pytest.approx(math.log(2), rel=1e-12)
    draws = np.abs(np.random.default_rng(7).laplace(size=10**6))
    assert np.median(draws) == pytest.approx(math.log(2), rel=5e-3)


def test_quantile_rule_oracle():
    # folded Laplace is Exp(1): isf(u) = -ln u
    n = 50
    c = expected_order_statistics("laplace", n)
    assert np.allclose(c.values, -np.log(np.arange(1, n + 1) / (n + 1)), rtol=1e-12)


def test_presets_and_model_curves():
    assert MODEL_PRESETS == {"gpd": "ts:1:2.69:8", "student": "ts:2:2.64:4.5", "ggd": "ggd:0.7:5"}
    d = parse_distribution(MODEL_PRESETS["ggd"])
    assert d.tau == pytest.approx(0.7) and d.scale == pytest.approx(5)
    curves = model_curves(64)
    assert set(curves) == {"gpd", "student", "ggd"}
    for c in curves.values():
        assert len(c.values) == 64
        assert np.all(np.diff(c.values) < 0) and np.all(c.values > 0)


def _mid_rank_error(curve, ref, ranks):
    return max(abs(curve.values[r - 1] / ref.values[r - 1] - 1) for r in ranks)


def test_iid_laplace_patches_match_quantile_curve():
    side = 16
    n = side * side
    ps = iid_patch_set(DistributionModel.laplace(), side, 100, seed=11)
    emp = average_sorted_magnitudes(ps, "identity")
    ref = expected_order_statistics("laplace", n)
    assert _mid_rank_error(emp, ref, range(n // 4, 3 * n // 4 + 1)) < 0.05


def test_iid_convergence_with_patch_count():
    side = 16
    n = side * side
    ranks = [n // 4, n // 2, 3 * n // 4]
    ref = expected_order_statistics("laplace", n)
    emp = average_sorted_magnitudes(iid_patch_set(DistributionModel.laplace(), side, 1000, seed=12), "identity")
    assert _mid_rank_error(emp, ref, ranks) < 0.02


def test_orthonormal_transforms_preserve_energy_for_every_patch():
    ps = iid_patch_set(DistributionModel.laplace(), 16, 10, seed=2)
    for kind in ("dct", "db4"):
        for p in ps.patches:
            assert np.linalg.norm(transform(p, kind)) == pytest.approx(np.linalg.norm(p), abs=1e-10)
