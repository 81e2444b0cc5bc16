"""Five-metric saliency evaluation harness with a literacy-conditioned baseline.

External saliency models participate by emitting AMAP files; the built-in
baseline interpolates between quantile-group mean maps so the harness can
run end to end without any pretrained network.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import metrics, stats
from .attention import AttentionMap, NormMode, normalize
from .features import LeakageError

METRIC_NAMES = ("PCC", "NSS", "AUC", "SIM", "KL")
HIGHER_IS_BETTER = {"PCC": True, "NSS": True, "AUC": True, "SIM": True, "KL": False}


@dataclass(frozen=True)
class EvalRecord:
    participant_id: str
    chart_id: str
    literacy_score: float
    predicted: AttentionMap
    truth: AttentionMap
    fixations: tuple  # (x, y) click locations

    @property
    def key(self):
        return (self.participant_id, self.chart_id)


def evaluate_record(rec: EvalRecord, undefined_value=None):
    """PCC, NSS, AUC, SIM, KL of one prediction against one participant's map.

    Per-participant maps are scored un-aggregated.  `undefined_value`
    optionally substitutes for PCC/NSS when the prediction has zero variance
    (e.g. a uniform control model); by default UndefinedMetricError propagates.
    """
    pred = normalize(rec.predicted, NormMode.SUM1)
    truth = normalize(rec.truth, NormMode.SUM1)
    try:
        pcc = metrics.pearson_cc(pred, truth)
    except metrics.UndefinedMetricError:
        if undefined_value is None:
            raise
        pcc = undefined_value
    try:
        nss_val = metrics.nss(pred, rec.fixations)
    except metrics.UndefinedMetricError:
        if undefined_value is None:
            raise
        nss_val = undefined_value
    return {
        "PCC": pcc,
        "NSS": nss_val,
        "AUC": metrics.auc_judd(pred, rec.fixations),
        "SIM": metrics.sim_histogram(pred, truth),
        "KL": metrics.kl_divergence(pred, truth),
    }


@dataclass
class BaselineModel:
    """Per chart: quantile-group mean maps over the training split.

    Prediction interpolates linearly between the two bin mean maps whose
    centers bracket the literacy score, clamped at the extreme bins.
    """
    bin_edges: np.ndarray                      # interior quantile edges
    bin_centers: np.ndarray                    # one per bin, ascending
    maps: Dict[str, List[Optional[AttentionMap]]]  # chart -> per-bin SUM1 map
    train_participants: frozenset


def fit_baseline(train_maps, train_scores, n_bins=5) -> BaselineModel:
    """Build quantile-bin mean maps from {(pid, chart): AttentionMap}.

    `train_scores` maps pid -> literacy score in [0, 1].
    """
    pids = sorted({pid for pid, _ in train_maps})
    scores = np.array([train_scores[p] for p in pids])
    qs = np.arange(1, n_bins) / n_bins
    edges = np.quantile(scores, qs)
    bins = (scores[:, None] > edges[None, :]).sum(axis=1)
    all_edges = np.concatenate([[scores.min()], edges, [scores.max()]])
    centers = (all_edges[:-1] + all_edges[1:]) / 2.0
    pid_bin = dict(zip(pids, bins))
    charts = sorted({c for _, c in train_maps})
    maps = {}
    for chart in charts:
        per_bin = []
        for b in range(n_bins):
            member_maps = [normalize(m, NormMode.SUM1).values
                           for (pid, c), m in train_maps.items()
                           if c == chart and pid_bin[pid] == b
                           and m.values.sum() > 0]
            if member_maps:
                mean = np.mean(member_maps, axis=0)
                per_bin.append(normalize(AttentionMap(mean), NormMode.SUM1))
            else:
                per_bin.append(None)
        maps[chart] = per_bin
    return BaselineModel(bin_edges=edges, bin_centers=centers, maps=maps,
                         train_participants=frozenset(pids))


def assert_no_leakage(model: BaselineModel, test_participants):
    leaked = set(test_participants) & set(model.train_participants)
    if leaked:
        raise LeakageError(
            f"test participants {sorted(leaked)} were used to fit the baseline")


def baseline_predict(model: BaselineModel, chart_id, literacy_score) -> AttentionMap:
    """SUM1 map for a score: linear blend of the bracketing bin mean maps."""
    per_bin = [m for m in model.maps[chart_id]]
    present = [i for i, m in enumerate(per_bin) if m is not None]
    if not present:
        raise ValueError(f"no training maps for chart {chart_id}")
    centers = model.bin_centers[present]
    s = float(literacy_score)
    if s <= centers[0]:
        blended = per_bin[present[0]].values
    elif s >= centers[-1]:
        blended = per_bin[present[-1]].values
    else:
        hi = int(np.searchsorted(centers, s))
        lo = hi - 1
        w = (s - centers[lo]) / (centers[hi] - centers[lo])
        blended = ((1 - w) * per_bin[present[lo]].values
                   + w * per_bin[present[hi]].values)
    return normalize(AttentionMap(blended), NormMode.SUM1)


def uniform_predict(shape) -> AttentionMap:
    """Literacy-agnostic control: the uniform SUM1 map."""
    h, w = shape
    return AttentionMap(np.full((h, w), 1.0 / (h * w)), NormMode.SUM1)


def compare_models(results_a, results_b, m=len(METRIC_NAMES)):
    """Paired t-tests per metric over identical record keys, Bonferroni-adjusted.

    `results_a`/`results_b` map record key -> {metric: value}.
    """
    if set(results_a) != set(results_b):
        raise ValueError("record key sets differ between the two models")
    keys = sorted(results_a)
    out = {}
    for metric in METRIC_NAMES:
        a = [results_a[k][metric] for k in keys]
        b = [results_b[k][metric] for k in keys]
        t, df, p = stats.paired_t_test(a, b)
        out[metric] = {"t": t, "df": df, "p": p,
                       "p_adjusted": float(stats.bonferroni([p], m)[0]),
                       "mean_a": float(np.mean(a)), "mean_b": float(np.mean(b))}
    return out
