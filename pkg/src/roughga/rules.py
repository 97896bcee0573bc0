"""Certain and possible if-then rules read off an information system."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .data import AttributeSchema, Role, Schema
from .discretize import CutPointSet, DiscretizedTable
from .errors import ParameterError
from .rough import InformationSystem, membership, partition

CERTAIN = "certain"
POSSIBLE = "possible"


@dataclass(frozen=True)
class Rule:
    conditions: tuple[tuple[str, int], ...]
    decision: int
    kind: str
    plausibility: float
    support: int

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple((str(a), int(v)) for a, v in self.conditions))
        if self.kind == CERTAIN and self.plausibility != 1.0:
            raise ParameterError("certain rules have plausibility 1")
        if self.kind == POSSIBLE and not 0.0 < self.plausibility < 1.0:
            raise ParameterError("possible rules have plausibility strictly between 0 and 1")
        if self.kind not in (CERTAIN, POSSIBLE):
            raise ParameterError(f"unknown rule kind {self.kind!r}")
        if self.support < 1:
            raise ParameterError("rule support must be at least 1")

    @property
    def pattern(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.conditions)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    attributes: tuple[str, ...]
    cuts: CutPointSet | None = None
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        keys = [(r.conditions, r.decision) for r in self.rules]
        if len(set(keys)) != len(keys):
            raise ParameterError("duplicate rule")

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def certain(self) -> list[Rule]:
        return [r for r in self.rules if r.kind == CERTAIN]

    @property
    def possible(self) -> list[Rule]:
        return [r for r in self.rules if r.kind == POSSIBLE]

    @cached_property
    def by_pattern(self) -> dict[tuple[int, ...], list[Rule]]:
        index: dict[tuple[int, ...], list[Rule]] = {}
        for r in self.rules:
            index.setdefault(r.pattern, []).append(r)
        return index

    def to_jsonl(self) -> str:
        head = {"type": "ruleset", "attributes": list(self.attributes),
                "metrics": self.metrics,
                "cuts": None if self.cuts is None else
                {"k": self.cuts.k, "cuts": {n: list(c) for n, c in self.cuts.cuts.items()}}}
        lines = [json.dumps(head, sort_keys=True)]
        for r in self.rules:
            lines.append(json.dumps({"type": "rule", "conditions": [list(c) for c in r.conditions],
                                     "decision": r.decision, "kind": r.kind,
                                     "plausibility": r.plausibility, "support": r.support},
                                    sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RuleSet":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or rows[0].get("type") != "ruleset":
            raise ParameterError("rule file must start with a ruleset header")
        head = rows[0]
        cuts = head.get("cuts")
        cuts = None if cuts is None else CutPointSet(
            {n: tuple(c) for n, c in cuts["cuts"].items()}, cuts["k"])
        rules = [Rule(tuple(tuple(c) for c in r["conditions"]), r["decision"], r["kind"],
                      r["plausibility"], r["support"]) for r in rows[1:]]
        return cls(tuple(rules), tuple(head["attributes"]), cuts, head.get("metrics", {}))


def extract(system: InformationSystem, cuts: CutPointSet | None = None,
            metrics: dict | None = None) -> RuleSet:
    """One certain rule per pure pattern; one possible rule per decision
    present in a mixed pattern, weighted by rough membership."""
    if len(system) == 0:
        raise ParameterError("information system is empty")
    part = partition(system)
    targets = {d: system.decision_class(d) for d in (0, 1)}
    rules = []
    for cls, pattern in zip(part.classes, part.patterns):
        conditions = tuple(zip(part.attributes, pattern))
        present = [d for d in (0, 1) if not cls.isdisjoint(targets[d])]
        x = next(iter(cls))
        if len(present) == 1:
            rules.append(Rule(conditions, present[0], CERTAIN, 1.0, len(cls)))
            continue
        for d in present:
            rules.append(Rule(conditions, d, POSSIBLE, membership(x, targets[d], part), len(cls)))
    return RuleSet(tuple(rules), system.attributes, cuts, dict(metrics or {}))


def truncate(value: float, places: int = 5) -> str:
    """Fixed-point text with trailing digits cut, not rounded (1/15 -> 0.06666)."""
    scale = 10 ** places
    return f"{math.floor(value * scale + 1e-9) / scale:.{places}f}"


def _interval(attr: AttributeSchema, cuts: Sequence[float], b: int) -> str:
    edges = [attr.lower, *cuts, attr.upper]
    close = "]" if b == len(edges) - 2 else ")"
    return f"[{edges[b]:.2f}, {edges[b + 1]:.2f}{close}"


def render(rule: Rule, schema: Schema, cuts: CutPointSet | None = None) -> str:
    by_name = {a.name: a for a in schema}
    parts = []
    for name, value in rule.conditions:
        attr = by_name[name]
        if attr.is_numeric and cuts is not None and name in cuts.cuts:
            text = _interval(attr, cuts[name], value)
        elif attr.is_numeric:
            text = str(value)
        else:
            text = attr.code_label(value)
        parts.append(f"{attr.display} = {text}")
    decision = next(a for a in schema if a.role is Role.DECISION)
    outcome = decision.code_label(rule.decision)
    if rule.kind == CERTAIN:
        tail = f"Then {decision.display} = Most Probably {outcome}"
    else:
        tail = f"Then {decision.display} = {outcome} with plausibility = {truncate(rule.plausibility)}"
    return "If " + " and ".join(parts) + " " + tail


def render_all(ruleset: RuleSet, schema: Schema) -> str:
    return "".join(render(r, schema, ruleset.cuts) + "\n" for r in ruleset.rules)


class Prediction(NamedTuple):
    decision: int | None
    plausibility: float


def predict(ruleset: RuleSet, record: Sequence[int]) -> Prediction:
    """Exact-pattern lookup. Unmatched patterns and 0.5/0.5 ties abstain
    (decision None)."""
    if len(record) != len(ruleset.attributes):
        raise ParameterError(
            f"record has {len(record)} values, rules use {len(ruleset.attributes)} attributes")
    matched = ruleset.by_pattern.get(tuple(int(v) for v in record))
    if not matched:
        return Prediction(None, 0.0)
    top = max(matched, key=lambda r: r.plausibility)
    if sum(r.plausibility == top.plausibility for r in matched) > 1:
        return Prediction(None, top.plausibility)
    return Prediction(top.decision, top.plausibility)


class Evaluation(NamedTuple):
    accuracy: float | None
    coverage: float
    abstention_rate: float
    records: int


def evaluate(ruleset: RuleSet, test: DiscretizedTable) -> Evaluation:
    """Accuracy over decided records only; coverage counts pattern matches."""
    if len(test) == 0:
        raise ParameterError("test set is empty")
    d = test.decision_index
    names = test.names[:d] + test.names[d + 1:]
    if tuple(names) != ruleset.attributes:
        raise ParameterError("test table attributes differ from the rule attributes")
    truth = np.asarray(test.matrix[:, d])
    matched = decided = correct = 0
    for row, y in zip(test.condition_rows(), truth.tolist()):
        pred = predict(ruleset, row)
        if tuple(row) in ruleset.by_pattern:
            matched += 1
        if pred.decision is not None:
            decided += 1
            correct += pred.decision == y
    n = len(test)
    return Evaluation(correct / decided if decided else None, matched / n, 1 - decided / n, n)
