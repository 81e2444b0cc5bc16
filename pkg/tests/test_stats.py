import numpy as np
import pytest

from vislit.stats import (binarize_sgl, bonferroni, build_literacy_scores,
                          corrected_score, elbow_index, indicator_matrix, mca,
                          normalize_corrected, paired_t_test,
                          poly_eval_and_derivatives, poly_stationary_points,
                          polyfit_elbow, skewness)

EQ1_CUBIC = [0.598, 1.216, -2.619, 1.708]
EQ2_QUARTIC = [0.112, 1.267, -4.852, 7.989, -4.046]


class TestScoreCorrection:
    def test_all_correct(self):
        counts = [4] * 12
        raw = corrected_score([True] * 12, counts)
        assert raw == 12.0
        assert normalize_corrected(raw, counts) == 1.0

    def test_all_wrong(self):
        counts = [4] * 12
        raw = corrected_score([False] * 12, counts)
        assert raw == pytest.approx(-4.0)
        assert normalize_corrected(raw, counts) == pytest.approx(0.0)

    def test_partial_hand_case(self):
        counts = [4] * 12
        raw = corrected_score([True] * 8 + [False] * 4, counts)
        assert raw == pytest.approx(8 - 4 / 3, abs=1e-4)
        assert normalize_corrected(raw, counts) == pytest.approx(
            (raw + 4) / 16, abs=1e-9)
        assert normalize_corrected(raw, counts) == pytest.approx(0.6667, abs=1e-4)

    def test_monotone_in_correct_answers(self):
        counts = [3, 4, 5, 2]
        for i in range(4):
            flags = [False] * 4
            lower = normalize_corrected(corrected_score(flags, counts), counts)
            flags[i] = True
            higher = normalize_corrected(corrected_score(flags, counts), counts)
            assert higher > lower

    def test_bad_choice_count(self):
        with pytest.raises(ValueError):
            corrected_score([True], [1])

    def test_build_literacy_scores_ranges(self):
        s = build_literacy_scores("p", [True] * 6 + [False] * 6, [4] * 12,
                                  7, 15, [4] * 10)
        assert 0 <= s.vlat <= 1
        assert s.calvi == pytest.approx(7 / 15)
        assert s.sgl == pytest.approx((40 - 10) / 50)


class TestSkewness:
    def test_symmetric_zero(self):
        assert skewness([1, 2, 3, 4, 5]) == pytest.approx(0.0, abs=1e-9)

    def test_hand_case(self):
        assert skewness([0, 0, 0, 1]) == pytest.approx(1.1547, abs=1e-3)

    def test_antisymmetry(self, rng):
        x = rng.random(50)
        assert skewness(-x) == pytest.approx(-skewness(x), abs=1e-12)

    def test_median_variant(self):
        # right-skewed data: mean > median
        assert skewness([1, 1, 1, 10], method="median") > 0

    def test_zero_variance(self):
        with pytest.raises(ValueError):
            skewness([2, 2, 2])


class TestPolyfit:
    def test_recovers_exact_cubic(self, rng):
        cubic = [0.1, 1.0, -3.0, 2.5]
        x = np.linspace(0, 1, 40)
        y = np.polyval(cubic[::-1], x)
        fit = polyfit_elbow(x, y, max_degree=6)
        assert fit.degree == 3
        assert np.allclose(fit.coefficients, cubic, atol=1e-6)

    def test_linear_data_degree_one(self):
        x = np.linspace(0, 1, 20)
        fit = polyfit_elbow(x, 2 * x + 1, max_degree=5)
        assert fit.degree == 1

    def test_r2_nondecreasing(self, rng):
        x = rng.random(30)
        y = rng.random(30)
        fit = polyfit_elbow(x, y, max_degree=6)
        r2s = [fit.r2_by_degree[d] for d in range(1, 7)]
        assert all(b >= a - 1e-10 for a, b in zip(r2s, r2s[1:]))

    def test_published_cubic_stationary_points(self):
        pts = poly_stationary_points(EQ1_CUBIC)
        inside = pts[(pts >= 0) & (pts <= 1)]
        assert inside == pytest.approx([0.36, 0.67], abs=0.01)

    def test_zero_variance_y(self):
        with pytest.raises(ValueError):
            polyfit_elbow([1, 2, 3, 4], [5, 5, 5, 5], 2)


class TestPolyEval:
    def test_constant(self):
        assert poly_eval_and_derivatives([7.0], 3.0) == (7.0, 0.0, 0.0)

    def test_square_derivative(self):
        p, d1, d2 = poly_eval_and_derivatives([0, 0, 1], 3.0)
        assert (p, d1, d2) == (9.0, 6.0, 2.0)

    def test_published_quartic_derivative(self):
        _, d1, _ = poly_eval_and_derivatives(EQ2_QUARTIC, 0.5)
        assert d1 == pytest.approx(0.384, abs=1e-3)


class TestBinarizeSgl:
    def test_boundaries(self):
        assert list(binarize_sgl([3, 4, 6, 1])) == [0, 1, 1, 0]

    def test_range_check(self):
        with pytest.raises(ValueError):
            binarize_sgl([0])


def correlated_items(rng, n, blocks, items_per_block, flip=0.05):
    factors = rng.integers(0, 2, (n, blocks))
    cols = []
    for b in range(blocks):
        for _ in range(items_per_block):
            noise = rng.random(n) < flip
            cols.append(np.where(noise, 1 - factors[:, b], factors[:, b]))
    return np.column_stack(cols)


class TestMca:
    def test_two_correlated_items_one_dominant_axis(self):
        rng = np.random.default_rng(3)
        resp = correlated_items(rng, 400, blocks=1, items_per_block=2, flip=0.0)
        result = mca(resp)
        assert result.eigenvalues[0] / result.eigenvalues.sum() >= 0.99

    def test_independent_items_flat_spectrum(self):
        rng = np.random.default_rng(5)
        resp = rng.integers(0, 2, (3000, 6))
        result = mca(resp)
        ev = result.eigenvalues
        assert ev.max() / ev.min() <= 1.5

    def test_eigenvalues_descending(self, rng):
        resp = rng.integers(0, 3, (100, 8))
        ev = mca(resp).eigenvalues
        assert np.all(np.diff(ev) <= 1e-12)

    def test_inertia_row_permutation_invariant(self, rng):
        resp = rng.integers(0, 2, (60, 10))
        base = mca(resp).eigenvalues.sum()
        permuted = mca(resp[rng.permutation(60)]).eigenvalues.sum()
        assert permuted == pytest.approx(base, abs=1e-9)

    def test_three_block_elbow(self):
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            resp = correlated_items(rng, 500, blocks=3, items_per_block=20)
            result = mca(resp)
            if result.n_components_elbow == 3:
                hits += 1
        assert hits >= 9

    def test_degenerate_item_rejected(self):
        with pytest.raises(ValueError):
            indicator_matrix(np.zeros((10, 3), dtype=int))


class TestTTest:
    def test_hand_case(self):
        t, df, p = paired_t_test([2, 4, 6, 8, 10], [1, 2, 3, 4, 5])
        assert t == pytest.approx(4.2426, abs=1e-4)
        assert df == 4
        assert p == pytest.approx(0.0132, abs=5e-4)

    def test_zero_variance(self):
        with pytest.raises(ValueError):
            paired_t_test([1, 2, 3], [1, 2, 3])

    def test_antisymmetry(self, rng):
        a, b = rng.random(20), rng.random(20)
        t1, _, p1 = paired_t_test(a, b)
        t2, _, p2 = paired_t_test(b, a)
        assert t2 == pytest.approx(-t1, abs=1e-12)
        assert p2 == pytest.approx(p1, abs=1e-12)

    def test_bonferroni_clamps(self):
        assert bonferroni([0.3], m=5)[0] == 1.0
        assert bonferroni([0.01, 0.002], m=2).tolist() == [0.02, 0.004]


class TestElbowRule:
    def test_stops_at_first_small_gain(self):
        assert elbow_index([0.5, 0.3, 0.005, 0.004], delta=0.01) == 2

    def test_caps_at_length(self):
        assert elbow_index([0.4, 0.3, 0.2], delta=0.01) == 3
