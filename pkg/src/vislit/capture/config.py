"""Study configuration: question items, SGL Likert items, timing and bubbles."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List


@dataclass(frozen=True)
class StudyItem:
    code: str
    test: str               # "VLAT" or "CALVI"
    question: str
    choices: List[str]
    correct: int
    image_w: int
    image_h: int
    chart: str = ""         # chart image path, relative to the config file
    time_limit_s: int = 90
    bubble_radius: int = 32
    blur_sigma: float = 19.0

    def __post_init__(self):
        if self.time_limit_s <= 0:
            raise ValueError(f"{self.code}: time limit must be positive")
        if not 0 <= self.correct < len(self.choices):
            raise ValueError(f"{self.code}: correct choice index out of range")


@dataclass(frozen=True)
class StudyConfig:
    items: List[StudyItem]
    sgl_items: List[str]
    order_seed: int = 0

    def __post_init__(self):
        codes = [i.code for i in self.items]
        if len(set(codes)) != len(codes):
            raise ValueError("item codes must be unique")
        if len(self.sgl_items) != 10:
            raise ValueError("SGL requires exactly 10 Likert items")

    def item(self, code) -> StudyItem:
        for i in self.items:
            if i.code == code:
                return i
        raise KeyError(code)

    def answer_key(self):
        return {i.code: i.correct for i in self.items}

    def to_dict(self):
        return {"items": [asdict(i) for i in self.items],
                "sgl_items": list(self.sgl_items),
                "order_seed": self.order_seed}

    @classmethod
    def from_dict(cls, d):
        return cls(items=[StudyItem(**it) for it in d["items"]],
                   sgl_items=list(d["sgl_items"]),
                   order_seed=int(d.get("order_seed", 0)))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))
