"""Ingest an exported study dataset back into analysis-side objects."""

import json
from pathlib import Path

from ..attention import ClickEvent, SessionLog, SKIPPED
from ..stats import build_literacy_scores
from .config import StudyConfig


def parse_participant_events(lines, config: StudyConfig):
    """Replay one participant's JSONL events into SessionLogs + SGL responses."""
    clicks_by_item = {}
    answer_by_item = {}
    duration_by_item = {}
    sgl = None
    pid = None
    for line in lines:
        ev = json.loads(line)
        kind = ev["kind"]
        if kind == "session_open":
            pid = ev["participant_id"]
        elif kind == "clicks":
            clicks_by_item.setdefault(ev["item"], []).extend(
                (s, c) for s, c in zip(ev["seq"], ev["clicks"]))
        elif kind == "answer":
            answer_by_item[ev["item"]] = ev["choice"]
            duration_by_item[ev["item"]] = ev.get("duration_ms", 0) / 1000.0
        elif kind == "sgl":
            sgl = ev["responses"]
    sessions = []
    for item_code, answer in answer_by_item.items():
        spec = config.item(item_code)
        ordered = sorted(clicks_by_item.get(item_code, []), key=lambda sc: sc[0])
        clicks = tuple(ClickEvent(c["x"], c["y"], c["t"]) for _, c in ordered)
        duration = duration_by_item[item_code]
        if clicks:
            duration = max(duration, clicks[-1].t / 1000.0)
        sessions.append(SessionLog(
            participant_id=pid, chart_id=item_code, clicks=clicks,
            answer=answer, duration_s=min(duration, spec.time_limit_s),
            image_w=spec.image_w, image_h=spec.image_h))
    return pid, sessions, sgl


def load_dataset(dataset_dir):
    """Read all participants; returns (config, sessions, sgl_by_participant)."""
    root = Path(dataset_dir)
    config = StudyConfig.load(root / "study_config.json")
    manifest = json.loads((root / "manifest.json").read_text())
    sessions = []
    sgl_by_pid = {}
    for fname in sorted(manifest["files"]):
        lines = (root / fname).read_text().splitlines()
        pid, psessions, sgl = parse_participant_events(lines, config)
        sessions.extend(psessions)
        if sgl is not None:
            sgl_by_pid[pid] = sgl
    return config, sessions, sgl_by_pid


def compute_scores(config: StudyConfig, sessions, sgl_by_pid):
    """Per-participant corrected + normalized scores for all three tests."""
    vlat_items = [i for i in config.items if i.test == "VLAT"]
    calvi_items = [i for i in config.items if i.test == "CALVI"]
    answer_key = config.answer_key()
    by_pid = {}
    for s in sessions:
        by_pid.setdefault(s.participant_id, {})[s.chart_id] = s.answer
    scores = {}
    for pid, answers in sorted(by_pid.items()):
        if pid not in sgl_by_pid:
            continue
        vlat_correct = [answers.get(i.code) != SKIPPED
                        and answers.get(i.code) == answer_key[i.code]
                        for i in vlat_items]
        vlat_counts = [len(i.choices) for i in vlat_items]
        calvi_correct = sum(
            answers.get(i.code) != SKIPPED
            and answers.get(i.code) == answer_key[i.code]
            for i in calvi_items)
        scores[pid] = build_literacy_scores(
            pid, vlat_correct, vlat_counts, calvi_correct,
            len(calvi_items), sgl_by_pid[pid])
    return scores
