"""Literacy-predictive feature vectors (4 within-map + 20 between-group).

Group reference maps are built exclusively from a declared training split;
building or using them with test participants is a hard error.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import metrics
from .attention import (AttentionMap, NormMode, RasterConfig, SessionLog,
                        SKIPPED, aggregate, normalize, rasterize)

log = logging.getLogger(__name__)

GROUPS = ("EXPERT", "NOVICE", "CORRECT", "WRONG")
BETWEEN_METRICS = ("MI", "KLD", "SRC", "SSIM", "MSE")

FEATURE_NAMES = (
    "within.click_count",
    "within.duration_s",
    "within.entropy",
    "within.coverage",
) + tuple(f"between.{m}.{g}" for g in GROUPS for m in BETWEEN_METRICS)

N_FEATURES = len(FEATURE_NAMES)  # 24


class LeakageError(RuntimeError):
    """A test participant's data reached a training-only structure."""


class MissingSessionError(ValueError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing sessions for: {self.missing}")


@dataclass
class GroupMaps:
    """Per-chart SUM1 aggregate maps for the four comparison groups.

    maps[chart_id][group] is None when the group was empty for that chart
    (e.g. nobody answered it wrong); downstream features are imputed.
    provenance[group] is the training participant set behind each map.
    """
    maps: Dict[str, Dict[str, Optional[AttentionMap]]]
    provenance: Dict[str, frozenset]

    def assert_no_overlap(self, participant_ids):
        ids = set(participant_ids)
        for group, members in self.provenance.items():
            leaked = ids & set(members)
            if leaked:
                raise LeakageError(
                    f"participants {sorted(leaked)} are in the {group} "
                    f"reference group; group maps must come from the training "
                    f"split only")


def quartile_split(scored_participants):
    """Top/bottom quartile participant ids by score; ties broken by id.

    `scored_participants` is a list of (participant_id, score).
    """
    n = len(scored_participants)
    q = n // 4
    if q < 1:
        raise ValueError("need at least 4 participants to form quartiles")
    ranked = sorted(scored_participants, key=lambda p: (p[1], p[0]))
    novices = frozenset(pid for pid, _ in ranked[:q])
    experts = frozenset(pid for pid, _ in ranked[-q:])
    return experts, novices


def build_group_maps(train_sessions: Sequence[SessionLog], scores,
                     answer_key: Dict[str, int],
                     cfg: RasterConfig = RasterConfig(),
                     score_of=None) -> GroupMaps:
    """Aggregate EXPERT/NOVICE (score quartiles) and CORRECT/WRONG maps.

    `scores` maps participant_id -> LiteracyScores; `score_of` overrides the
    grouping score (default: composite of the three normalized scores).
    `answer_key` gives the correct choice index per chart.
    """
    if score_of is None:
        score_of = lambda s: s.composite()
    pids = sorted({s.participant_id for s in train_sessions})
    experts, novices = quartile_split([(p, score_of(scores[p])) for p in pids])

    raster_cache = {}

    def raw_map(session):
        key = (session.participant_id, session.chart_id)
        if key not in raster_cache:
            raster_cache[key] = rasterize(session, cfg)
        return raster_cache[key]

    by_chart = {}
    for s in train_sessions:
        by_chart.setdefault(s.chart_id, []).append(s)

    maps = {}
    correct_pids = set()
    wrong_pids = set()
    for chart_id, sessions in by_chart.items():
        members = {g: [] for g in GROUPS}
        for s in sessions:
            m = raw_map(s)
            if m.values.sum() == 0:
                continue  # a session with no clicks cannot contribute to a mean map
            if s.participant_id in experts:
                members["EXPERT"].append(m)
            if s.participant_id in novices:
                members["NOVICE"].append(m)
            if s.answer != SKIPPED and s.answer == answer_key.get(chart_id):
                members["CORRECT"].append(m)
                correct_pids.add(s.participant_id)
            elif s.answer != SKIPPED:
                members["WRONG"].append(m)
                wrong_pids.add(s.participant_id)
        maps[chart_id] = {
            g: aggregate(ms) if ms else None for g, ms in members.items()
        }
        for g in GROUPS:
            if maps[chart_id][g] is None:
                log.warning("group %s is ABSENT for chart %s", g, chart_id)
    provenance = {
        "EXPERT": experts,
        "NOVICE": novices,
        "CORRECT": frozenset(correct_pids),
        "WRONG": frozenset(wrong_pids),
    }
    return GroupMaps(maps=maps, provenance=provenance)


def within_map_features(session: SessionLog, amap: AttentionMap):
    """(click count, duration, entropy bits, coverage) of one session's map."""
    if amap.values.sum() > 0:
        entropy = metrics.shannon_entropy(normalize(amap, NormMode.SUM1))
        coverage = metrics.saliency_coverage(amap)
    else:
        entropy = 0.0
        coverage = 0.0
    return np.array([len(session.clicks), session.duration_s, entropy, coverage])


def between_group_features(amap: AttentionMap, group_maps_for_chart):
    """Five similarity metrics against each of the four group maps (20 reals).

    Order follows FEATURE_NAMES: (MI, KLD, SRC, SSIM, MSE) per group in
    (EXPERT, NOVICE, CORRECT, WRONG).  KL direction is group||participant.
    Absent groups yield NaN entries, to be imputed downstream.
    """
    out = []
    cand = normalize(amap, NormMode.SUM1) if amap.values.sum() > 0 else None
    for g in GROUPS:
        ref = group_maps_for_chart.get(g)
        if ref is None or cand is None:
            out.extend([np.nan] * len(BETWEEN_METRICS))
            continue
        out.extend([
            metrics.mutual_information(cand, ref),
            metrics.kl_divergence(cand, ref),
            metrics.spearman_rank(cand, ref),
            metrics.ssim(cand, ref),
            metrics.mse(cand, ref),
        ])
    return np.array(out)


def participant_chart_vector(session: SessionLog, groups: GroupMaps,
                             cfg: RasterConfig = RasterConfig()):
    amap = rasterize(session, cfg)
    return np.concatenate([
        within_map_features(session, amap),
        between_group_features(amap, groups.maps[session.chart_id]),
    ])


def build_feature_matrix(sessions: Sequence[SessionLog], groups: GroupMaps,
                         chart_subset, cfg: RasterConfig = RasterConfig()):
    """participants x 24 matrix, per-chart vectors averaged over the subset.

    Every participant must have a session for every chart in the subset.
    Returns (matrix, participant_ids); rows may contain NaN where a group
    map was absent (impute with FeatureNormalizer).
    """
    chart_subset = list(chart_subset)
    index = {(s.participant_id, s.chart_id): s for s in sessions}
    pids = sorted({s.participant_id for s in sessions})
    missing = [(p, c) for p in pids for c in chart_subset if (p, c) not in index]
    if missing:
        raise MissingSessionError(missing)
    rows = []
    for p in pids:
        vecs = [participant_chart_vector(index[(p, c)], groups, cfg)
                for c in chart_subset]
        rows.append(np.nanmean(np.stack(vecs), axis=0) if len(vecs) > 1 else vecs[0])
    return np.stack(rows), pids


@dataclass
class FeatureNormalizer:
    """Min-max scaling fitted on the training split; NaNs imputed with the
    training column means.  Test rows outside [0,1] are clamped to
    [-0.5, 1.5] with a logged warning."""
    col_mean: np.ndarray = field(default=None)
    col_min: np.ndarray = field(default=None)
    col_max: np.ndarray = field(default=None)

    def fit(self, train_matrix):
        m = np.asarray(train_matrix, dtype=np.float64)
        self.col_mean = np.nanmean(m, axis=0)
        filled = np.where(np.isnan(m), self.col_mean, m)
        self.col_min = filled.min(axis=0)
        self.col_max = filled.max(axis=0)
        return self

    def transform(self, matrix, is_train=False):
        m = np.asarray(matrix, dtype=np.float64)
        m = np.where(np.isnan(m), self.col_mean, m)
        span = self.col_max - self.col_min
        span = np.where(span == 0, 1.0, span)
        scaled = (m - self.col_min) / span
        if not is_train:
            n_out = int(np.sum((scaled < -0.5) | (scaled > 1.5)))
            if n_out:
                log.warning("clamping %d out-of-range feature values", n_out)
            scaled = np.clip(scaled, -0.5, 1.5)
        return scaled

    def fit_transform(self, train_matrix):
        return self.fit(train_matrix).transform(train_matrix, is_train=True)
