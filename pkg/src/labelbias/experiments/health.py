"""Care-management enrollment under simple and complex cost models."""
from __future__ import annotations

import csv
import fnmatch
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from ..data import Dataset, format_float
from ..errors import CapacityError, EmptyAfterFilteringError, InvalidConfigError, UnmappedColumnError
from ..estimators import fit_linear, predict
from ..seeding import rng

FEATURE_BLOCKS = ("demographics", "current_health", "past_cost")
BLOCKS = (*FEATURE_BLOCKS, "ignore")
ROLES = ("future_cost", "chronic_count", "race")
DEFAULT_CAPACITIES = (0.01, 0.02, 0.05, 0.10, 0.20, 0.30, 0.50)
DEFAULT_RIDGE = 1e-6
HIGH_NEEDS_THRESHOLD = 3
ENROLLMENT_COLUMNS = ("capacity", "model", "n_enrolled", "high_needs_enrolled", "black_fraction")


@dataclass
class ColumnMap:
    rules: list[tuple[str, str]]
    roles: dict[str, str]
    race_positive: str = "1"

    @classmethod
    def parse(cls, text: str) -> "ColumnMap":
        rules, roles = [], {}
        race_positive = "1"
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"column map line {lineno}: expected `column = block`")
            key, value = (s.strip() for s in line.split("=", 1))
            if key.startswith("@"):
                role = key[1:]
                if role == "race_positive":
                    race_positive = value
                elif role in ROLES:
                    roles[role] = value
                else:
                    raise InvalidConfigError(f"column map line {lineno}: unknown role {key!r}")
            elif value in BLOCKS:
                rules.append((key, value))
            else:
                raise InvalidConfigError(f"column map line {lineno}: unknown block {value!r}")
        return cls(rules, roles, race_positive)

    @classmethod
    def from_file(cls, path: str | Path) -> "ColumnMap":
        return cls.parse(Path(path).read_text())

    def block_of(self, column: str) -> str | None:
        for pattern, block in self.rules:
            if fnmatch.fnmatchcase(column, pattern):
                return block
        return None


def default_column_map() -> ColumnMap:
    return ColumnMap.parse(resources.files("labelbias.resources").joinpath("health_columns.map").read_text())


@dataclass
class HealthDataset:
    data: Dataset
    blocks: dict[str, list[str]]
    future_cost: str
    chronic_count: str
    race: str
    n_dropped: int = 0

    @property
    def complex_features(self) -> list[str]:
        return [c for b in FEATURE_BLOCKS for c in self.blocks[b]]

    @property
    def simple_features(self) -> list[str]:
        return list(self.blocks["current_health"])

    @property
    def black(self) -> np.ndarray:
        return self.data[self.race]

    @property
    def high_needs(self) -> np.ndarray:
        return self.data[self.chronic_count] >= HIGH_NEEDS_THRESHOLD


def load_health_dataset(path: str | Path, column_map: ColumnMap | str | Path | None = None) -> HealthDataset:
    """Read the CSV and assign every column to a feature block or a role.

    Rows with missing values in any used column are dropped and counted.
    """
    cmap = default_column_map() if column_map is None else column_map
    if not isinstance(cmap, ColumnMap):
        cmap = ColumnMap.from_file(cmap)
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"health dataset not found: {path}")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise EmptyAfterFilteringError(f"{path} is empty") from None

    if len(frame) == 0:
        raise EmptyAfterFilteringError(f"{path} has no data rows")
    for role in ROLES:
        if role not in cmap.roles:
            raise UnmappedColumnError(f"column map does not name the {role} column")
        if cmap.roles[role] not in frame.columns:
            raise UnmappedColumnError(f"{role} column {cmap.roles[role]!r} is not in {path.name}")

    blocks: dict[str, list[str]] = {b: [] for b in BLOCKS}
    role_columns = set(cmap.roles.values())
    for col in frame.columns:
        block = cmap.block_of(col)
        if block is None:
            if col in role_columns:
                continue
            raise UnmappedColumnError(f"column {col!r} is not assigned to any block")
        blocks[block].append(col)

    race_col = cmap.roles["race"]
    race = frame[race_col]
    if race.dtype == object:
        indicator = (race.astype(str).str.strip().str.lower() == cmap.race_positive.lower()).astype(float)
    else:
        indicator = (race == float(cmap.race_positive)).astype(float)
    frame = frame.assign(**{race_col: indicator.where(race.notna())})

    used = [c for b in FEATURE_BLOCKS for c in blocks[b]]
    used += [c for c in (cmap.roles["future_cost"], cmap.roles["chronic_count"], race_col) if c not in used]
    sub = frame[used]
    non_numeric = [c for c in used if not pd.api.types.is_numeric_dtype(sub[c])]
    if non_numeric:
        raise InvalidConfigError(f"non-numeric feature columns: {non_numeric}")
    keep = sub.notna().all(axis=1).to_numpy()
    sub = sub[keep]
    if len(sub) == 0:
        raise EmptyAfterFilteringError(f"no complete rows left in {path.name}")
    data = Dataset(used, sub.to_numpy(dtype=float))
    return HealthDataset(
        data, {b: blocks[b] for b in FEATURE_BLOCKS}, cmap.roles["future_cost"], cmap.roles["chronic_count"],
        race_col, int((~keep).sum()),
    )


@dataclass
class EnrollmentCurves:
    capacities: list[float]
    rows: list[dict]
    n_test: int
    metadata: dict = field(default_factory=dict)

    def get(self, capacity: float, model: str) -> dict:
        for r in self.rows:
            if r["capacity"] == capacity and r["model"] == model:
                return r
        raise KeyError((capacity, model))

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ENROLLMENT_COLUMNS)
        for r in self.rows:
            w.writerow([
                format_float(r["capacity"]), r["model"], r["n_enrolled"], r["high_needs_enrolled"],
                format_float(r["black_fraction"]),
            ])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def run_enrollment(
    d: HealthDataset, capacities: Sequence[float] = DEFAULT_CAPACITIES, seed: int = 0, ridge: float = DEFAULT_RIDGE
) -> EnrollmentCurves:
    """Enroll the top fraction of test patients by predicted future cost.

    Both models are ridge-linear fits of future cost; high needs means at
    least three chronic conditions in the following year.
    """
    capacities = [float(c) for c in capacities]
    bad = [c for c in capacities if not (0.0 < c <= 1.0)]
    if bad:
        raise CapacityError(f"capacities must lie in (0, 1], got {bad}")
    n = d.data.n_rows
    order = rng(seed, "health-split").permutation(n)
    train = d.data.take(np.sort(order[: n // 2]))
    test = d.data.take(np.sort(order[n // 2:]))
    n_test = test.n_rows
    high = test[d.chronic_count] >= HIGH_NEEDS_THRESHOLD
    black = test[d.race]
    rows = []
    for model, feats in (("complex", d.complex_features), ("simple", d.simple_features)):
        fit = fit_linear(train, d.future_cost, feats, ridge=ridge)
        scores = predict(fit, test)
        ranking = np.argsort(-scores, kind="stable")
        for cap in capacities:
            k = math.floor(cap * n_test + 1e-9)
            chosen = ranking[:k]
            rows.append({
                "capacity": cap,
                "model": model,
                "n_enrolled": int(k),
                "high_needs_enrolled": int(high[chosen].sum()),
                "black_fraction": float(black[chosen].mean()) if k else 0.0,
                "mean_chronic_count": float(test[d.chronic_count][chosen].mean()) if k else 0.0,
            })
    meta = {"seed": seed, "ridge": ridge, "n_train": train.n_rows, "n_test": n_test, "n_dropped": d.n_dropped}
    return EnrollmentCurves(capacities, rows, n_test, meta)
