"""Indiscernibility classes, lower/upper approximations, rough membership and
the two accuracy measures (object-level and pattern-level)."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import AbstractSet, Iterable, NamedTuple, Sequence

import numpy as np

from .discretize import DiscretizedTable
from .errors import ParameterError


@dataclass(frozen=True)
class InformationSystem:
    """Universe of record ids, condition attributes and their (binned)
    values, plus the binary decision of every record."""

    ids: tuple[int, ...]
    attributes: tuple[str, ...]
    values: np.ndarray
    decisions: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64).reshape(len(self.ids), len(self.attributes))
        decisions = np.asarray(self.decisions, dtype=np.int64).reshape(len(self.ids))
        values.setflags(write=False)
        decisions.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "decisions", decisions)
        if len(set(self.ids)) != len(self.ids):
            raise ParameterError("record ids must be unique")
        if not np.isin(decisions, (0, 1)).all():
            raise ParameterError("decisions must be 0 or 1")

    @classmethod
    def from_table(cls, table: DiscretizedTable) -> "InformationSystem":
        d = table.decision_index
        m = table.matrix
        names = table.names[:d] + table.names[d + 1:]
        return cls(table.ids, names, np.delete(m, d, axis=1), m[:, d])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], decisions: Sequence[int],
                  attributes: Sequence[str] | None = None,
                  ids: Sequence[int] | None = None) -> "InformationSystem":
        width = len(rows[0]) if len(rows) else len(attributes or ())
        if attributes is None:
            attributes = [f"a{j}" for j in range(width)]
        if ids is None:
            ids = range(len(rows))
        return cls(tuple(ids), tuple(attributes), np.array(rows, dtype=np.int64), decisions)

    def __len__(self) -> int:
        return len(self.ids)

    @cached_property
    def universe(self) -> frozenset[int]:
        return frozenset(self.ids)

    @cached_property
    def position(self) -> dict[int, int]:
        return {rid: p for p, rid in enumerate(self.ids)}

    def decision_class(self, decision: int) -> frozenset[int]:
        return frozenset(rid for rid, d in zip(self.ids, self.decisions.tolist()) if d == decision)

    def pattern(self, record_id: int) -> tuple[int, ...]:
        return tuple(self.values[self.position[record_id]].tolist())


@dataclass(frozen=True)
class EquivalenceClassPartition:
    attributes: tuple[str, ...]
    classes: tuple[frozenset[int], ...]
    patterns: tuple[tuple[int, ...], ...]
    universe: frozenset[int]

    @cached_property
    def _owner(self) -> dict[int, int]:
        return {x: i for i, cls in enumerate(self.classes) for x in cls}

    def class_of(self, x: int) -> frozenset[int]:
        try:
            return self.classes[self._owner[x]]
        except KeyError:
            raise ParameterError(f"record {x} is not in the universe") from None


@dataclass(frozen=True)
class ApproximationPair:
    target: frozenset[int]
    lower: frozenset[int]
    upper: frozenset[int]

    @property
    def boundary(self) -> frozenset[int]:
        return self.upper - self.lower


def partition(system: InformationSystem, attributes: Iterable[str] | None = None
              ) -> EquivalenceClassPartition:
    """Group records that agree on every attribute in ``attributes``
    (all condition attributes by default). Classes are ordered by pattern."""
    names = system.attributes if attributes is None else tuple(attributes)
    if not names:
        raise ParameterError("attribute subset must be non-empty")
    unknown = [n for n in names if n not in system.attributes]
    if unknown:
        raise ParameterError(f"attributes not in the system: {unknown}")
    cols = [system.attributes.index(n) for n in names]
    groups: dict[tuple[int, ...], list[int]] = defaultdict(list)
    for rid, row in zip(system.ids, system.values[:, cols].tolist()):
        groups[tuple(row)].append(rid)
    patterns = sorted(groups)
    return EquivalenceClassPartition(names, tuple(frozenset(groups[p]) for p in patterns),
                                     tuple(patterns), system.universe)


def _check_subset(part: EquivalenceClassPartition, target: AbstractSet[int]) -> frozenset[int]:
    target = frozenset(target)
    if not target <= part.universe:
        raise ParameterError("target set is not a subset of the universe")
    return target


def lower_approx(part: EquivalenceClassPartition, target: AbstractSet[int]) -> frozenset[int]:
    target = _check_subset(part, target)
    return frozenset().union(*(c for c in part.classes if c <= target))


def upper_approx(part: EquivalenceClassPartition, target: AbstractSet[int]) -> frozenset[int]:
    target = _check_subset(part, target)
    return frozenset().union(*(c for c in part.classes if not c.isdisjoint(target)))


def approximate(part: EquivalenceClassPartition, target: AbstractSet[int]) -> ApproximationPair:
    return ApproximationPair(frozenset(target), lower_approx(part, target),
                             upper_approx(part, target))


def membership(x: int, target: AbstractSet[int], part: EquivalenceClassPartition) -> float:
    """Fraction of x's indiscernibility class that lies in ``target``."""
    cls = part.class_of(x)
    return len(cls & target) / len(cls)


def accuracy(pair: ApproximationPair) -> float | None:
    """|lower| / |upper|; None when the upper approximation is empty."""
    if not pair.upper:
        return None
    return len(pair.lower) / len(pair.upper)


class PatternCounts(NamedTuple):
    pure: int
    total: int
    ratio: float

    @property
    def mixed(self) -> int:
        return self.total - self.pure


def pattern_counts(totals: np.ndarray, positives: np.ndarray) -> PatternCounts:
    seen = totals > 0
    pure = int(np.count_nonzero(seen & ((positives == 0) | (positives == totals))))
    total = int(np.count_nonzero(seen))
    return PatternCounts(pure, total, pure / total if total else float("nan"))


def positive_alpha(totals: np.ndarray, positives: np.ndarray) -> float | None:
    """Object-level accuracy of the decision-1 class from per-pattern counts."""
    upper = int(totals[positives > 0].sum())
    if upper == 0:
        return None
    return int(totals[(positives == totals) & (totals > 0)].sum()) / upper


def grouped_counts(values: np.ndarray, decisions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Records and decision-1 records per distinct row of ``values``."""
    if values.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    _, inverse = np.unique(values, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    totals = np.bincount(inverse)
    positives = np.bincount(inverse, weights=decisions, minlength=totals.size).astype(np.int64)
    return totals, positives


def pattern_consistency(system: InformationSystem) -> PatternCounts:
    """Distinct condition patterns whose records all share one decision,
    over all distinct patterns."""
    if len(system) == 0:
        raise ParameterError("information system is empty")
    return pattern_counts(*grouped_counts(system.values, system.decisions))


def alpha(system: InformationSystem, decision: int = 1) -> float | None:
    """Object-level accuracy of one decision class over all attributes."""
    part = partition(system)
    return accuracy(approximate(part, system.decision_class(decision)))


def is_consistent(system: InformationSystem) -> bool:
    totals, positives = grouped_counts(system.values, system.decisions)
    return bool(np.all((positives == 0) | (positives == totals)))


def pattern_space(cardinalities: Iterable[int]) -> int:
    """Number of distinct patterns the attribute value sets allow."""
    return int(np.prod([int(c) for c in cardinalities], dtype=object))
