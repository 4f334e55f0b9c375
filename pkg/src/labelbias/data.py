"""Columned numeric table with role annotations."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import LengthMismatchError, MissingColumnsError

ROLE_NAMES = ("true_label", "proxy_label", "retained", "candidate")


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


@dataclass
class Dataset:
    """Rectangular float table addressed by column name.

    ``roles`` maps a role name (``true_label``, ``proxy_label``, ``retained``,
    ``candidate``) to a column name, or to a list of names for ``retained``.
    """

    columns: list[str]
    values: np.ndarray
    roles: dict[str, str | list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.columns = list(self.columns)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1 and len(self.columns) == 0 and values.size == 0:
            values = values.reshape(0, 0)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise LengthMismatchError(
                f"values of shape {values.shape} do not match {len(self.columns)} columns"
            )
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        self.values = values
        self._index = {c: i for i, c in enumerate(self.columns)}

    @classmethod
    def from_columns(
        cls, data: Mapping[str, Iterable[float]], roles: Mapping[str, str | list[str]] | None = None
    ) -> "Dataset":
        names = list(data)
        arrays = [np.asarray(data[c], dtype=float).ravel() for c in names]
        lengths = {a.shape[0] for a in arrays}
        if len(lengths) > 1:
            raise LengthMismatchError(f"columns have differing lengths {sorted(lengths)}")
        n = lengths.pop() if lengths else 0
        values = np.column_stack(arrays) if arrays else np.empty((n, 0))
        return cls(names, values, dict(roles or {}))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n_rows

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self._index[name]]
        except KeyError:
            raise MissingColumnsError(f"missing column {name!r}") from None

    def matrix(self, names: Iterable[str]) -> np.ndarray:
        names = list(names)
        missing = [c for c in names if c not in self._index]
        if missing:
            raise MissingColumnsError(f"missing column(s) {missing}")
        return self.values[:, [self._index[c] for c in names]]

    def require(self, names: Iterable[str]) -> None:
        missing = [c for c in names if c not in self._index]
        if missing:
            raise MissingColumnsError(f"missing column(s) {missing}")

    def take(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.columns, self.values[rows], dict(self.roles))

    def with_column(self, name: str, values: np.ndarray) -> "Dataset":
        values = np.asarray(values, dtype=float).ravel()
        if values.shape[0] != self.n_rows:
            raise LengthMismatchError(f"column {name!r} has {values.shape[0]} rows, expected {self.n_rows}")
        if name in self._index:
            out = self.values.copy()
            out[:, self._index[name]] = values
            return Dataset(self.columns, out, dict(self.roles))
        return Dataset([*self.columns, name], np.column_stack([self.values, values]), dict(self.roles))

    def with_roles(self, **roles: str | list[str]) -> "Dataset":
        return Dataset(self.columns, self.values, {**self.roles, **roles})

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.values:
            writer.writerow([format_float(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path, roles: Mapping[str, str | list[str]] | None = None) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                return cls([], np.empty((0, 0)), dict(roles or {}))
            rows = [[float(v) for v in row] for row in reader if row]
        values = np.array(rows, dtype=float).reshape(len(rows), len(header))
        if np.isnan(values).any():
            raise ValueError(f"{path}: missing values are not allowed")
        return cls(header, values, dict(roles or {}))
