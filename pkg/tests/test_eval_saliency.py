import numpy as np
import pytest

from vislit.attention import AttentionMap, NormMode, normalize, rasterize
from vislit.eval_saliency import (BaselineModel, EvalRecord, METRIC_NAMES,
                                  assert_no_leakage, baseline_predict,
                                  compare_models, evaluate_record, fit_baseline,
                                  uniform_predict)
from vislit.features import LeakageError
from vislit.metrics import UndefinedMetricError
from vislit.synth import DEFAULT_RASTER, generate_study


@pytest.fixture(scope="module")
def study():
    return generate_study(20, seed=11)


@pytest.fixture(scope="module")
def train_maps(study):
    return {(s.participant_id, s.chart_id): rasterize(s, DEFAULT_RASTER)
            for s in study.sessions}


@pytest.fixture(scope="module")
def baseline(study, train_maps):
    scores = study.scores()
    return fit_baseline(train_maps, {p: scores[p].composite() for p in scores})


class TestEvaluateRecord:
    def make_record(self, rng, pred=None):
        truth = AttentionMap(rng.random((20, 20)) + 0.01)
        if pred is None:
            pred = AttentionMap(rng.random((20, 20)) + 0.01)
        return EvalRecord("p", "c", 0.5, pred, truth, ((3, 4), (10, 12)))

    def test_all_metrics_present(self, rng):
        out = evaluate_record(self.make_record(rng))
        assert set(out) == set(METRIC_NAMES)
        assert 0 <= out["AUC"] <= 1
        assert 0 <= out["SIM"] <= 1
        assert out["KL"] >= 0

    def test_perfect_prediction(self, rng):
        truth = AttentionMap(rng.random((20, 20)) + 0.01)
        rec = EvalRecord("p", "c", 0.5, truth, truth, ((3, 4),))
        out = evaluate_record(rec)
        assert out["PCC"] == pytest.approx(1.0)
        assert out["SIM"] == pytest.approx(1.0)
        assert out["KL"] == pytest.approx(0.0, abs=1e-6)

    def test_uniform_prediction_needs_substitute(self, rng):
        rec = self.make_record(rng, pred=uniform_predict((20, 20)))
        with pytest.raises(UndefinedMetricError):
            evaluate_record(rec)
        out = evaluate_record(rec, undefined_value=0.0)
        assert out["PCC"] == 0.0
        assert out["NSS"] == 0.0
        assert out["AUC"] == pytest.approx(0.5)


class TestBaseline:
    def test_predictions_are_sum1(self, baseline, study):
        chart = study.config.items[0].code
        for s in (0.0, 0.33, 0.8, 1.0):
            m = baseline_predict(baseline, chart, s)
            assert m.values.sum() == pytest.approx(1.0, abs=1e-9)
            assert (m.values >= 0).all()

    def test_extremes_clamp_to_end_bins(self, baseline, study):
        chart = study.config.items[0].code
        low = baseline_predict(baseline, chart, -5.0)
        lowest_bin = baseline.maps[chart][0]
        assert np.allclose(low.values, lowest_bin.values)
        high = baseline_predict(baseline, chart, 5.0)
        last = [m for m in baseline.maps[chart] if m is not None][-1]
        assert np.allclose(high.values, last.values)

    def test_interpolation_blends_neighbors(self, baseline, study):
        chart = study.config.items[0].code
        present = [i for i, m in enumerate(baseline.maps[chart])
                   if m is not None]
        if len(present) < 2:
            pytest.skip("need two populated bins")
        c0 = baseline.bin_centers[present[0]]
        c1 = baseline.bin_centers[present[1]]
        mid = baseline_predict(baseline, chart, (c0 + c1) / 2)
        blend = 0.5 * (baseline.maps[chart][present[0]].values
                       + baseline.maps[chart][present[1]].values)
        blend /= blend.sum()
        assert np.allclose(mid.values, blend, atol=1e-12)

    def test_score_dependence(self, baseline, study):
        # ability shifts the click focus, so the low-score and high-score
        # predictions for an informative chart must differ
        chart = study.config.items[0].code
        low = baseline_predict(baseline, chart, 0.05)
        high = baseline_predict(baseline, chart, 0.95)
        assert not np.allclose(low.values, high.values)

    def test_leakage_guard(self, baseline):
        with pytest.raises(LeakageError):
            assert_no_leakage(baseline, ["P0000"])
        assert_no_leakage(baseline, ["somebody_else"])

    def test_unknown_chart(self, baseline):
        with pytest.raises(KeyError):
            baseline_predict(baseline, "NOT_A_CHART", 0.5)


class TestCompareModels:
    def test_paired_tests_per_metric(self, rng):
        keys = [(f"p{i}", "c") for i in range(12)]
        a = {k: {m: float(rng.random() + 0.3) for m in METRIC_NAMES}
             for k in keys}
        b = {k: {m: a[k][m] - 0.1 - 0.01 * rng.random() for m in METRIC_NAMES}
             for k in keys}
        out = compare_models(a, b)
        for m in METRIC_NAMES:
            assert out[m]["t"] > 0
            assert out[m]["df"] == 11
            assert out[m]["p_adjusted"] >= out[m]["p"]
            assert out[m]["p_adjusted"] <= 1.0

    def test_mismatched_keys_rejected(self):
        a = {("p", "c"): {m: 1.0 for m in METRIC_NAMES}}
        with pytest.raises(ValueError):
            compare_models(a, {})
