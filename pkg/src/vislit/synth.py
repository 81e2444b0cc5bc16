"""Synthetic study generator.

Stands in for the capture UI: emits datasets in the exported study format
whose click patterns encode a latent ability, so the whole analysis pipeline
can be exercised (and regression-tested) without human participants.

Each participant has an ability in [0, 1].  On informative charts the click
cloud tightens and shifts with ability; on uninformative charts everyone
clicks alike.  Item correctness and SGL responses are monotone in ability,
so literacy scores, levels, and attention features all agree.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .attention import ClickEvent, RasterConfig, SessionLog, SKIPPED
from .capture.config import StudyConfig, StudyItem
from .capture.dataset import compute_scores

DEFAULT_IMAGE = (64, 64)
DEFAULT_RASTER = RasterConfig(bubble_radius=4, blur_sigma=3.0)


def make_config(vlat_codes=("V1", "V3", "V6"), calvi_codes=("T14", "T37"),
                image_size=DEFAULT_IMAGE, n_choices=4, seed=0) -> StudyConfig:
    w, h = image_size
    items = []
    for code in list(vlat_codes) + list(calvi_codes):
        test = "VLAT" if code.startswith("V") else "CALVI"
        items.append(StudyItem(
            code=code, test=test, question=f"Synthetic question for {code}",
            choices=[f"choice {i}" for i in range(n_choices)],
            correct=0, image_w=w, image_h=h,
            bubble_radius=DEFAULT_RASTER.bubble_radius,
            blur_sigma=DEFAULT_RASTER.blur_sigma))
    sgl = [f"Synthetic self-assessment statement {i + 1}" for i in range(10)]
    return StudyConfig(items=items, sgl_items=sgl, order_seed=seed)


def _chart_anchor(code, w, h):
    digest = hashlib.sha256(code.encode()).digest()
    return (0.25 + 0.5 * digest[0] / 255.0) * w, (0.25 + 0.5 * digest[1] / 255.0) * h


def _clicks_for(rng, item: StudyItem, ability, informative):
    w, h = item.image_w, item.image_h
    ax, ay = _chart_anchor(item.code, w, h)
    if informative:
        # focal point drifts with ability and the cloud tightens around it
        cx = ax + (ability - 0.5) * 0.5 * w
        cy = ay + (0.5 - ability) * 0.5 * h
        spread = (0.30 - 0.25 * ability) * min(w, h)
        n = int(6 + round(10 * ability))
    else:
        cx, cy = ax, ay
        spread = 0.15 * min(w, h)
        n = 10
    xs = np.clip(rng.normal(cx, spread, n), 0, w - 1).astype(int)
    ys = np.clip(rng.normal(cy, spread, n), 0, h - 1).astype(int)
    ts = np.sort(rng.integers(100, 60_000, n))
    return [ClickEvent(int(x), int(y), int(t)) for x, y, t in zip(xs, ys, ts)]


def _item_thresholds(config, rng):
    # spread per-item difficulty within each test so every test's score
    # distribution stays spread out no matter how few items it has
    out = {}
    for test in ("VLAT", "CALVI"):
        codes = [i.code for i in config.items if i.test == test]
        if not codes:
            continue
        levels = np.linspace(0.25, 0.75, len(codes))
        out.update(zip(codes, rng.permutation(levels)))
    return out


@dataclass
class SynthStudy:
    config: StudyConfig
    sessions: List[SessionLog]
    sgl_by_pid: Dict[str, List[int]]
    ability: Dict[str, float]
    raster: RasterConfig = DEFAULT_RASTER

    def scores(self):
        return compute_scores(self.config, self.sessions, self.sgl_by_pid)


def generate_study(n_participants, config: Optional[StudyConfig] = None,
                   seed=0, informative_charts=None,
                   answer_noise=0.0) -> SynthStudy:
    """Simulate a full study.  `informative_charts=None` makes every chart's
    viewing pattern ability-driven; pass a subset to restrict that."""
    if config is None:
        config = make_config(seed=seed)
    rng = np.random.default_rng(seed)
    informative = set(informative_charts if informative_charts is not None
                      else [i.code for i in config.items])
    thresholds = _item_thresholds(config, rng)
    sessions = []
    sgl_by_pid = {}
    ability = {}
    for p in range(n_participants):
        pid = f"P{p:04d}"
        a = (p + 0.5) / n_participants  # even ability coverage, deterministic
        ability[pid] = a
        for item in config.items:
            correct = a > thresholds[item.code]
            if answer_noise > 0 and rng.random() < answer_noise:
                correct = not correct
            answer = item.correct if correct else (item.correct + 1) % len(item.choices)
            clicks = _clicks_for(rng, item, a, item.code in informative)
            duration = float(np.clip(15 + 50 * (1 - a) + rng.normal(0, 3), 1, 90))
            duration = max(duration, clicks[-1].t / 1000.0)
            sessions.append(SessionLog(
                participant_id=pid, chart_id=item.code, clicks=tuple(clicks),
                answer=answer, duration_s=min(duration, 90.0),
                image_w=item.image_w, image_h=item.image_h))
        base = 1 + 5 * a
        sgl_by_pid[pid] = [int(np.clip(round(base + off), 1, 6))
                           for off in np.linspace(-0.5, 0.5, 10)]
    return SynthStudy(config=config, sessions=sessions, sgl_by_pid=sgl_by_pid,
                      ability=ability)


def write_dataset(study: SynthStudy, out_dir):
    """Write the study in the exported-dataset layout (JSONL + manifest)."""
    out = Path(out_dir)
    (out / "participants").mkdir(parents=True, exist_ok=True)
    by_pid = {}
    for s in study.sessions:
        by_pid.setdefault(s.participant_id, []).append(s)
    order = [i.code for i in study.config.items]
    manifest = {"participants": sorted(by_pid), "files": {}}
    for pid in sorted(by_pid):
        lines = [json.dumps({"kind": "session_open", "participant_id": pid,
                             "seed": 0, "item_order": order,
                             "screen_w": None, "screen_h": None, "scale": 1.0})]
        sess = {s.chart_id: s for s in by_pid[pid]}
        seq = 0
        for code in order:
            s = sess[code]
            lines.append(json.dumps({"kind": "item_start", "item": code}))
            if s.clicks:
                seqs = list(range(seq, seq + len(s.clicks)))
                seq += len(s.clicks)
                lines.append(json.dumps({
                    "kind": "clicks", "item": code, "seq": seqs,
                    "clicks": [{"x": c.x, "y": c.y, "t": c.t} for c in s.clicks]}))
            lines.append(json.dumps({"kind": "answer", "item": code,
                                     "choice": s.answer,
                                     "duration_ms": int(s.duration_s * 1000)}))
        lines.append(json.dumps({"kind": "sgl",
                                 "responses": study.sgl_by_pid[pid]}))
        lines.append(json.dumps({"kind": "finalize"}))
        payload = "\n".join(lines) + "\n"
        fname = f"participants/{pid}.jsonl"
        (out / fname).write_text(payload)
        manifest["files"][fname] = {
            "sha256": hashlib.sha256(payload.encode()).hexdigest(),
            "n_events": len(lines),
        }
    study.config.save(out / "study_config.json")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def paper_split(scores, n_levels=5, per_bin=4, seed=0):
    """Hold out `per_bin` participants from each composite-score quantile."""
    from .sal2lit.binning import quantile_bin

    pids = sorted(scores)
    composite = [scores[p].composite() for p in pids]
    _, labels = quantile_bin(composite, n_levels)
    rng = np.random.default_rng(seed)
    test = []
    for level in range(n_levels):
        members = [p for p, l in zip(pids, labels) if l == level]
        if len(members) < per_bin:
            raise ValueError(f"level {level} has only {len(members)} participants")
        test.extend(rng.choice(members, size=per_bin, replace=False))
    test = sorted(str(t) for t in test)
    train = [p for p in pids if p not in set(test)]
    return train, test
