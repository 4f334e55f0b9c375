from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from ..data import format_float

SWEEP_COLUMNS = ("param", "value", "model", "label", "metric", "metric_value", "stderr", "n_train", "n_test", "seed")


@dataclass(frozen=True)
class SweepCell:
    value: float
    model: str
    label: str
    metric: str
    metric_value: float
    stderr: float
    n_train: int
    n_test: int
    seed: int


@dataclass
class SweepResult:
    param: str
    grid: list[float]
    cells: list[SweepCell]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        bad = [c for c in self.cells if not (math.isfinite(c.metric_value) and math.isfinite(c.stderr))]
        if bad:
            raise ValueError(f"non-finite sweep cells: {bad[:3]}")

    def get(self, value: float, model: str, label: str, metric: str) -> SweepCell:
        for c in self.cells:
            if c.value == value and c.model == model and c.label == label and c.metric == metric:
                return c
        raise KeyError((value, model, label, metric))

    def curve(self, model: str, label: str, metric: str) -> list[float]:
        return [self.get(v, model, label, metric).metric_value for v in self.grid]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for c in self.cells:
            w.writerow([
                self.param, format_float(c.value), c.model, c.label, c.metric,
                format_float(c.metric_value), format_float(c.stderr), c.n_train, c.n_test, c.seed,
            ])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def map_points(fn: Callable, args: Sequence[tuple], jobs: int = 1) -> list:
    """Evaluate ``fn(*a)`` for every argument tuple, in order, optionally in processes."""
    if jobs <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


def flatten(chunks: Iterable[list]) -> list:
    return [x for chunk in chunks for x in chunk]
