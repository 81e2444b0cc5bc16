"""Shared pipeline plumbing: manifests, artifact stamping, CSV helpers."""

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np

from . import __version__


@dataclass
class PipelineManifest:
    """Split definition and seed for one analysis run.

    Plain key-value text format, one `key = value` per line, '#' comments.
    `train`/`test` are comma-separated participant ids and must be disjoint.
    """
    dataset: str = ""
    seed: int = 0
    train: List[str] = field(default_factory=list)
    test: List[str] = field(default_factory=list)
    overrides: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise ValueError(f"train/test splits overlap: {sorted(overlap)}")

    @classmethod
    def load(cls, path):
        kv = {}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad manifest line: {raw!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            kv[k] = v
        known = {
            "dataset": kv.pop("dataset", ""),
            "seed": int(kv.pop("seed", "0")),
            "train": [s for s in kv.pop("train", "").split(",") if s],
            "test": [s for s in kv.pop("test", "").split(",") if s],
        }
        return cls(**known, overrides=kv)

    def save(self, path):
        lines = [f"dataset = {self.dataset}", f"seed = {self.seed}",
                 f"train = {','.join(self.train)}",
                 f"test = {','.join(self.test)}"]
        lines += [f"{k} = {v}" for k, v in self.overrides.items()]
        Path(path).write_text("\n".join(lines) + "\n")

    def hash(self):
        payload = json.dumps({
            "dataset": self.dataset, "seed": self.seed, "train": self.train,
            "test": self.test, "overrides": self.overrides}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def stamp_artifact(path, manifest_hash=""):
    """Sidecar metadata so every output names its producing tool + inputs."""
    meta = {"tool": "vislit", "version": __version__,
            "manifest_hash": manifest_hash}
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2))


def content_hash(*parts):
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, (str, int, float)):
            h.update(str(p).encode())
        elif isinstance(p, Path):
            h.update(p.read_bytes())
        else:
            h.update(bytes(p))
    return h.hexdigest()


def up_to_date(stamp_path, digest, force=False):
    """Content-hash short-circuit: True when the artifact is already current."""
    stamp = Path(stamp_path)
    if force or not stamp.exists():
        return False
    return stamp.read_text().strip() == digest


def write_stamp(stamp_path, digest):
    Path(stamp_path).write_text(digest + "\n")


def write_feature_csv(path, matrix, participant_ids, feature_names):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["participant_id", *feature_names])
        for pid, row in zip(participant_ids, matrix):
            w.writerow([pid, *(f"{v:.10g}" for v in row)])


def read_feature_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0][1:]
    pids = [r[0] for r in rows[1:]]
    matrix = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return matrix, pids, header


def write_metric_rows(path, rows):
    """rows: iterable of (participant_id, chart_id, metric_name, group, value)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["participant_id", "chart_id", "metric_name", "group", "value"])
        for r in rows:
            w.writerow(r)
