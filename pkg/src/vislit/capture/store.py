"""Append-only session persistence for the study runner.

One JSON-lines file per session, flushed after every acknowledged batch, so
a crash loses at most the unacknowledged batch.  Events carry a "kind"
discriminator; click events get dense per-session sequence numbers.
"""

import hashlib
import json
import time
import uuid
from pathlib import Path

from .config import StudyConfig

SKIPPED = "SKIPPED"


class SessionError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


class UnknownTokenError(SessionError):
    def __init__(self, token):
        super().__init__("UNKNOWN_TOKEN", f"unknown session token {token}")


class BacktrackError(SessionError):
    def __init__(self, item):
        super().__init__("BACKTRACK_REJECTED",
                         f"item {item} is not the current item")


class TimeExpiredError(SessionError):
    def __init__(self, item):
        super().__init__("TIME_EXPIRED",
                         f"time limit reached on {item}; only SKIPPED accepted")


class BatchRejectedError(SessionError):
    def __init__(self, reason):
        super().__init__("BATCH_REJECTED", reason)


class Session:
    def __init__(self, token, participant_id, config: StudyConfig, path, clock,
                 rng_seed, screen_w=None, screen_h=None, scale=1.0):
        import numpy as np

        self.token = token
        self.participant_id = participant_id
        self.config = config
        self.path = Path(path)
        self.clock = clock
        order = list(np.random.default_rng(rng_seed).permutation(
            [i.code for i in config.items]))
        self.item_order = [str(c) for c in order]
        self.item_index = 0
        self.next_seq = 0
        self.finalized = False
        self.item_started_at = clock()
        self._file = open(self.path, "a")
        self._append({"kind": "session_open", "participant_id": participant_id,
                      "seed": rng_seed, "item_order": self.item_order,
                      "screen_w": screen_w, "screen_h": screen_h,
                      "scale": scale})
        self._append({"kind": "item_start", "item": self.current_item})

    @property
    def current_item(self):
        if self.item_index < len(self.item_order):
            return self.item_order[self.item_index]
        return None

    def _append(self, event):
        self._file.write(json.dumps(event) + "\n")
        self._file.flush()

    def _elapsed_s(self):
        return self.clock() - self.item_started_at

    def record_clicks(self, item, clicks):
        if self.finalized:
            raise SessionError("FINALIZED", "session already finalized")
        if item != self.current_item:
            raise BacktrackError(item)
        spec = self.config.item(item)
        for i, c in enumerate(clicks):
            if not (0 <= c["x"] < spec.image_w and 0 <= c["y"] < spec.image_h):
                raise BatchRejectedError(
                    f"click {i} out of bounds: ({c['x']}, {c['y']})")
            if c["t"] < 0:
                raise BatchRejectedError(f"click {i} has negative timestamp")
        seqs = list(range(self.next_seq, self.next_seq + len(clicks)))
        self.next_seq += len(clicks)
        self._append({"kind": "clicks", "item": item, "seq": seqs,
                      "clicks": [{"x": int(c["x"]), "y": int(c["y"]),
                                  "t": int(c["t"])} for c in clicks]})
        return seqs

    def record_answer(self, item, choice):
        if self.finalized:
            raise SessionError("FINALIZED", "session already finalized")
        if item != self.current_item:
            raise BacktrackError(item)
        spec = self.config.item(item)
        elapsed = self._elapsed_s()
        if elapsed > spec.time_limit_s and choice != SKIPPED:
            raise TimeExpiredError(item)
        if choice != SKIPPED and not 0 <= int(choice) < len(spec.choices):
            raise SessionError("BAD_CHOICE", f"choice {choice} out of range")
        self._append({"kind": "answer", "item": item, "choice": choice,
                      "duration_ms": int(min(elapsed, spec.time_limit_s) * 1000)})
        self.item_index += 1
        self.item_started_at = self.clock()
        if self.current_item is not None:
            self._append({"kind": "item_start", "item": self.current_item})

    def record_sgl(self, responses):
        if self.finalized:
            raise SessionError("FINALIZED", "session already finalized")
        if len(responses) != 10 or any(not 1 <= int(r) <= 6 for r in responses):
            raise SessionError("BAD_SGL", "SGL needs 10 responses in 1..6")
        self._append({"kind": "sgl", "responses": [int(r) for r in responses]})

    def finalize(self):
        if self.finalized:
            raise SessionError("FINALIZED", "session already finalized")
        self._append({"kind": "finalize"})
        self.finalized = True
        self._file.close()


class SessionStore:
    """All live sessions plus their durable files under one directory."""

    def __init__(self, root, config: StudyConfig, clock=time.monotonic):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(exist_ok=True)
        self.config = config
        self.clock = clock
        self.sessions = {}

    def open_session(self, participant_id, screen_w=None, screen_h=None,
                     scale=1.0, seed=None):
        token = uuid.uuid4().hex
        if seed is None:
            seed = self.config.order_seed + len(self.sessions)
        path = self.root / "sessions" / f"{token}.jsonl"
        self.sessions[token] = Session(token, participant_id, self.config,
                                       path, self.clock, seed,
                                       screen_w, screen_h, scale)
        return token

    def get(self, token) -> Session:
        try:
            return self.sessions[token]
        except KeyError:
            raise UnknownTokenError(token) from None


def export_dataset(store: SessionStore, out_dir):
    """One JSON-lines file per participant plus a checksum manifest."""
    out = Path(out_dir)
    (out / "participants").mkdir(parents=True, exist_ok=True)
    by_participant = {}
    for path in sorted((store.root / "sessions").glob("*.jsonl")):
        lines = path.read_text().splitlines()
        if not lines:
            continue
        pid = json.loads(lines[0])["participant_id"]
        by_participant.setdefault(pid, []).extend(lines)
    manifest = {"participants": sorted(by_participant), "files": {}}
    for pid, lines in sorted(by_participant.items()):
        fname = f"participants/{pid}.jsonl"
        payload = "\n".join(lines) + "\n"
        (out / fname).write_text(payload)
        manifest["files"][fname] = {
            "sha256": hashlib.sha256(payload.encode()).hexdigest(),
            "n_events": len(lines),
        }
    store.config.save(out / "study_config.json")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def verify_manifest(dataset_dir):
    """Recompute checksums; returns the list of corrupted files."""
    root = Path(dataset_dir)
    manifest = json.loads((root / "manifest.json").read_text())
    bad = []
    for fname, meta in manifest["files"].items():
        digest = hashlib.sha256((root / fname).read_bytes()).hexdigest()
        if digest != meta["sha256"]:
            bad.append(fname)
    return bad
