import numpy as np
import pytest

from vislit.attention import (Accumulation, AttentionMap, ClickEvent, NormMode,
                              OutOfBoundsClickError, RasterConfig, SessionLog,
                              ZeroMassError, aggregate, binarize_threshold,
                              binarize_top_fraction, gaussian_kernel, normalize,
                              rasterize)

from conftest import session_with_clicks


def dense_blur_oracle(grid, sigma):
    """Brute-force 2D convolution with the outer-product Gaussian kernel."""
    k1 = gaussian_kernel(sigma)
    k2 = np.outer(k1, k1)
    r = len(k1) // 2
    h, w = grid.shape
    padded = np.zeros((h + 2 * r, w + 2 * r))
    padded[r:r + h, r:r + w] = grid
    out = np.zeros_like(grid)
    for y in range(h):
        for x in range(w):
            out[y, x] = np.sum(padded[y:y + 2 * r + 1, x:x + 2 * r + 1] * k2)
    return out


def disk_pixel_count(radius):
    span = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(span, span)
    return int(np.sum(dx * dx + dy * dy <= radius * radius))


SMALL = RasterConfig(bubble_radius=3, blur_sigma=1.5)


class TestRasterize:
    def test_single_center_click_peak_and_symmetry(self):
        log = session_with_clicks([(100, 100)], size=(201, 201))
        m = rasterize(log)
        peak = np.unravel_index(np.argmax(m.values), m.values.shape)
        assert peak == (100, 100)
        v = m.values
        assert np.allclose(v, v[::-1, :], atol=1e-6)   # vertical mirror
        assert np.allclose(v, v[:, ::-1], atol=1e-6)   # horizontal mirror
        assert np.allclose(v, v.T, atol=1e-6)          # diagonal

    def test_two_identical_clicks_double_the_map(self):
        one = rasterize(session_with_clicks([(100, 100)]))
        two = rasterize(session_with_clicks([(100, 100), (100, 100)]))
        assert np.allclose(two.values, 2 * one.values, atol=1e-9)

    def test_interior_mass_conservation(self):
        m = rasterize(session_with_clicks([(100, 100)]))
        expected = disk_pixel_count(32)
        assert abs(m.values.sum() - expected) <= 1e-3 * expected

    def test_matches_dense_convolution_oracle_64(self, rng):
        points = [(int(x), int(y)) for x, y in rng.integers(5, 59, (5, 2))]
        log = session_with_clicks(points, size=(64, 64))
        m = rasterize(log, SMALL)
        stamped = np.zeros((64, 64))
        span = np.arange(-3, 4)
        dx, dy = np.meshgrid(span, span)
        disk = dx * dx + dy * dy <= 9
        for x, y in points:
            stamped[y + dy[disk], x + dx[disk]] += 1
        oracle = dense_blur_oracle(stamped, 1.5)
        assert np.max(np.abs(m.values - oracle)) < 1e-6

    def test_translation_equivariance_interior(self):
        a = rasterize(session_with_clicks([(90, 95)]), SMALL)
        b = rasterize(session_with_clicks([(97, 101)]), SMALL)
        assert np.array_equal(np.roll(a.values, (6, 7), axis=(0, 1)), b.values)

    def test_additivity_over_click_lists(self):
        pa = [(40, 40), (60, 80)]
        pb = [(120, 50)]
        a = rasterize(session_with_clicks(pa), SMALL)
        b = rasterize(session_with_clicks(pb), SMALL)
        both = rasterize(session_with_clicks(pa + pb), SMALL)
        assert np.allclose(both.values, a.values + b.values, atol=1e-12)

    def test_union_saturates_overlap(self):
        cfg = RasterConfig(3, 1.5, Accumulation.UNION)
        one = rasterize(session_with_clicks([(50, 50)]), cfg)
        two = rasterize(session_with_clicks([(50, 50), (50, 50)]), cfg)
        assert np.allclose(one.values, two.values)

    def test_out_of_bounds_click_rejected_with_index(self):
        log = SessionLog("p", "c", (ClickEvent(10, 10, 5), ClickEvent(250, 10, 9)),
                         0, 1.0, 200, 200)
        with pytest.raises(OutOfBoundsClickError) as e:
            rasterize(log)
        assert e.value.index == 1

    def test_empty_clicks_zero_map(self):
        m = rasterize(session_with_clicks([]))
        assert m.values.sum() == 0
        assert m.norm_mode == NormMode.RAW


class TestNormalize:
    def test_sum1(self):
        m = normalize(AttentionMap(np.full((2, 2), 2.0)), NormMode.SUM1)
        assert np.allclose(m.values, 0.25)
        assert m.norm_mode == NormMode.SUM1

    def test_max1(self):
        m = normalize(AttentionMap(np.array([[0., 4.], [0., 0.]])), NormMode.MAX1)
        assert np.array_equal(m.values, [[0, 1], [0, 0]])

    def test_zero_mass_error(self):
        with pytest.raises(ZeroMassError):
            normalize(AttentionMap(np.zeros((3, 3))), NormMode.SUM1)

    def test_sum1_sums_to_one(self, rng):
        for _ in range(10):
            m = normalize(AttentionMap(rng.random((8, 8))), NormMode.SUM1)
            assert abs(m.values.sum() - 1.0) < 1e-6


class TestAggregate:
    def test_singleton_is_sum1_normalization(self, rng):
        m = AttentionMap(rng.random((6, 6)))
        assert np.allclose(aggregate([m]).values,
                           normalize(m, NormMode.SUM1).values)

    def test_two_disjoint_deltas(self):
        a = np.zeros((2, 2)); a[0, 0] = 1
        b = np.zeros((2, 2)); b[1, 1] = 1
        agg = aggregate([AttentionMap(a), AttentionMap(b)])
        assert agg.values[0, 0] == pytest.approx(0.5)
        assert agg.values[1, 1] == pytest.approx(0.5)

    def test_matches_direct_mean_oracle(self, rng):
        maps = [AttentionMap(rng.random((5, 7)) + 0.01) for _ in range(6)]
        agg = aggregate(maps)
        stack = np.stack([m.values / m.values.sum() for m in maps])
        oracle = stack.mean(axis=0)
        oracle /= oracle.sum()
        assert np.max(np.abs(agg.values - oracle)) < 1e-9

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            aggregate([AttentionMap(rng.random((4, 4))),
                       AttentionMap(rng.random((5, 4)))])

    def test_empty_list(self):
        with pytest.raises(ValueError):
            aggregate([])


class TestBinarize:
    def test_top_fraction_full(self, rng):
        m = AttentionMap(rng.random((4, 4)) + 0.1)
        assert binarize_top_fraction(m, 1.0).all()

    def test_threshold_zero_map(self):
        assert not binarize_threshold(AttentionMap(np.zeros((3, 3))), 0.0).any()

    def test_top_quarter_hand_case(self):
        m = AttentionMap(np.array([[4., 3.], [2., 1.]]))
        assert np.array_equal(binarize_top_fraction(m, 0.25),
                              [[True, False], [False, False]])

    def test_ties_break_row_major(self):
        m = AttentionMap(np.array([[1., 1.], [1., 1.]]))
        mask = binarize_top_fraction(m, 0.5)
        assert np.array_equal(mask, [[True, True], [False, False]])

    def test_bad_fraction(self, rng):
        m = AttentionMap(rng.random((2, 2)))
        for f in (0.0, 1.5, -0.1):
            with pytest.raises(ValueError):
                binarize_top_fraction(m, f)
