"""Cut-point discretization of numeric attributes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import IO, Mapping, Sequence

import numpy as np

from .data import MISSING, AttributeSchema, InformationTable, Role, Schema
from .errors import ParameterError, RangeError, SchemaError

#: Minimum gap between adjacent cuts, relative to the attribute range.
GAP = 1e-6


def numeric_conditions(schema: Schema) -> tuple[AttributeSchema, ...]:
    return tuple(a for a in schema if a.role is Role.CONDITION and a.is_numeric)


def min_gap(attr: AttributeSchema) -> float:
    return GAP * (attr.upper - attr.lower)


@dataclass(frozen=True)
class CutPointSet:
    """Sorted interior cut points per numeric condition attribute; ``k`` bins each."""

    cuts: Mapping[str, tuple[float, ...]]
    k: int = 4

    def __post_init__(self):
        object.__setattr__(self, "cuts", {n: tuple(float(c) for c in cs)
                                          for n, cs in self.cuts.items()})

    def __getitem__(self, name: str) -> tuple[float, ...]:
        return self.cuts[name]

    def validate(self, schema: Schema) -> None:
        """Raise ParameterError unless the cuts fit ``schema``."""
        if self.k < 2:
            raise ParameterError("at least two bins per attribute required")
        attrs = numeric_conditions(schema)
        if set(self.cuts) != {a.name for a in attrs}:
            raise ParameterError("cut points must cover exactly the numeric condition attributes")
        for a in attrs:
            cs = self.cuts[a.name]
            if len(cs) != self.k - 1:
                raise ParameterError(f"{a.name}: expected {self.k - 1} cuts, got {len(cs)}")
            eps = min_gap(a)
            if not all(a.lower < c < a.upper for c in cs):
                raise ParameterError(f"{a.name}: cuts must lie strictly inside the bounds")
            if any(hi < lo + eps for lo, hi in zip(cs, cs[1:])):
                raise ParameterError(f"{a.name}: cuts must increase by at least {eps:g}")

    def flatten(self, schema: Schema) -> list[float]:
        return [c for a in numeric_conditions(schema) for c in self.cuts[a.name]]

    def to_text(self) -> str:
        lines = [f"# bins {self.k}"]
        lines += [" ".join([name] + [repr(c) for c in cs]) for name, cs in self.cuts.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, stream: IO[str]) -> "CutPointSet":
        cuts, k = {}, None
        for line in stream:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                words = line[1:].split()
                if len(words) == 2 and words[0] == "bins":
                    k = int(words[1])
                continue
            name, *values = line.split()
            try:
                cuts[name] = tuple(float(v) for v in values)
            except ValueError:
                raise SchemaError(f"bad cut values for {name!r}") from None
        if k is None:
            k = len(next(iter(cuts.values()), ())) + 1
        return cls(cuts, k)


def equal_width(schema: Schema, k: int = 4) -> CutPointSet:
    if k < 2:
        raise ParameterError("at least two bins per attribute required")
    return CutPointSet({a.name: tuple(a.lower + i * (a.upper - a.lower) / k for i in range(1, k))
                        for a in numeric_conditions(schema)}, k)


def repair(raw: Sequence[float], schema: Schema, k: int = 4) -> CutPointSet:
    """Decode a flat gene vector into valid cut points.

    Genes are clamped inside each attribute's bounds, sorted, and spread so
    adjacent cuts are at least the minimum gap apart.
    """
    attrs = numeric_conditions(schema)
    width = k - 1
    if k < 2 or len(raw) != width * len(attrs):
        raise ParameterError(f"expected {width * len(attrs)} genes, got {len(raw)}")
    cuts = {}
    for j, a in enumerate(attrs):
        eps = min_gap(a)
        lo, hi = a.lower + eps, a.upper - eps
        cs = sorted(min(max(float(g), lo), hi) for g in raw[j * width:(j + 1) * width])
        for i in range(1, width):
            if cs[i] < cs[i - 1] + eps:
                cs[i] = cs[i - 1] + eps
        if cs[-1] > hi:
            cs[-1] = hi
            for i in range(width - 2, -1, -1):
                if cs[i + 1] < cs[i] + eps:
                    cs[i] = cs[i + 1] - eps
                    # subtraction can round up; the forward check must hold exactly
                    while cs[i + 1] < cs[i] + eps:
                        cs[i] = float(np.nextafter(cs[i], -np.inf))
        cuts[a.name] = tuple(cs)
    return CutPointSet(cuts, k)


def bin_values(values: np.ndarray, cuts: Sequence[float]) -> np.ndarray:
    """Bin i holds [c_i, c_{i+1}); the upper bound falls in the last bin."""
    return np.searchsorted(np.asarray(cuts, dtype=np.float64), values, side="right")


@dataclass(frozen=True)
class DiscretizedTable:
    """Bin indices for numeric attributes, codes for categorical ones; the
    decision column is passed through."""

    schema: tuple[AttributeSchema, ...]
    records: tuple[tuple[int, ...], ...]
    ids: tuple[int, ...]
    cuts: CutPointSet

    def __len__(self) -> int:
        return len(self.records)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)

    @property
    def decision_index(self) -> int:
        return next(i for i, a in enumerate(self.schema) if a.role is Role.DECISION)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.array(self.records, dtype=np.int64).reshape(len(self.records), len(self.schema))
        m.setflags(write=False)
        return m

    def condition_rows(self) -> list[tuple[int, ...]]:
        d = self.decision_index
        return [r[:d] + r[d + 1:] for r in self.records]


def apply(table: InformationTable, cuts: CutPointSet) -> DiscretizedTable:
    cuts.validate(table.schema)
    columns = []
    for a in table.schema:
        col = table.columns[a.name]
        bad = np.flatnonzero(~table_contains(a, col))
        if bad.size:
            p = int(bad[0])
            value = table.records[p][table.index(a.name)]
            raise RangeError(table.ids[p], a.name, None if value is MISSING else value)
        if a.role is Role.CONDITION and a.is_numeric:
            columns.append(bin_values(col, cuts[a.name]))
        else:
            columns.append(col.astype(np.int64))
    records = list(zip(*(c.tolist() for c in columns))) if len(table) else []
    return DiscretizedTable(table.schema, tuple(records), table.ids, cuts)


def table_contains(attr: AttributeSchema, col: np.ndarray) -> np.ndarray:
    if attr.is_numeric:
        return (col >= attr.lower) & (col <= attr.upper)
    return np.isin(col, attr.codes)
