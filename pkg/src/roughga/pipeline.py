"""End-to-end runs: discretize, measure, extract rules, evaluate; and the
equal-width versus GA-optimized comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import AttributeSchema, InformationTable, Role
from .discretize import CutPointSet, apply, equal_width
from .errors import ParameterError, StateError
from .evolve import EvolutionHistory, GAConfig, evolve
from .rough import (InformationSystem, PatternCounts, alpha, pattern_consistency,
                    pattern_space)
from .rules import Evaluation, RuleSet, evaluate, extract


def stratified_split(table: InformationTable, fraction: float, seed: int
                     ) -> tuple[InformationTable, InformationTable]:
    """Shuffle each decision class and send ``fraction`` of it to training.
    Both parts keep the source record order."""
    if not 0.0 < fraction < 1.0:
        raise ParameterError("split fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    decisions = np.asarray(table.columns[table.decision_attribute.name])
    train = []
    for d in (0, 1):
        members = np.flatnonzero(decisions == d)
        members = members[rng.permutation(members.size)]
        train.extend(members[:int(round(fraction * members.size))].tolist())
    train_set = set(train)
    test = [p for p in range(len(table)) if p not in train_set]
    return table.subset(sorted(train)), table.subset(test)


@dataclass(frozen=True)
class Analysis:
    cuts: CutPointSet
    system: InformationSystem
    counts: PatternCounts
    alpha_positive: float | None
    alpha_negative: float | None
    rules: RuleSet
    evaluation: Evaluation | None


def analyse(train: InformationTable, cuts: CutPointSet,
            test: InformationTable | None = None) -> Analysis:
    system = InformationSystem.from_table(apply(train, cuts))
    counts = pattern_consistency(system)
    a1, a0 = alpha(system, 1), alpha(system, 0)
    metrics = {"pattern_ratio": counts.ratio, "pure_patterns": counts.pure,
               "total_patterns": counts.total, "alpha_positive": a1, "alpha_negative": a0}
    rules = extract(system, cuts, metrics)
    evaluation = evaluate(rules, apply(test, cuts)) if test is not None and len(test) else None
    return Analysis(cuts, system, counts, a1, a0, rules, evaluation)


@dataclass(frozen=True)
class Comparison:
    schema: tuple[AttributeSchema, ...]
    train_size: int
    test_size: int
    config: GAConfig
    split: float
    baseline: Analysis
    optimized: Analysis
    history: EvolutionHistory

    def to_text(self) -> str:
        cfg = self.config
        cards = [cfg.bins if a.is_numeric else len(a.codes)
                 for a in self.schema if a.role is Role.CONDITION]
        lines = [
            "# rough set accuracy: equal-width bins vs GA-optimized cut points",
            f"records_train={self.train_size}",
            f"records_test={self.test_size}",
            f"split={self.split}",
            f"bins={cfg.bins}",
            f"metric={cfg.metric}",
            f"seed={cfg.seed}",
            f"population={cfg.population_size}",
            f"generations={cfg.generations}",
            f"pattern_space={pattern_space(cards)}",
            "",
        ]
        for title, a in (("equal-width", self.baseline), ("ga-optimized", self.optimized)):
            lines += [f"[{title}]"] + _section(a) + [""]
        lines += [
            "[fitness]",
            f"baseline={self.history.baseline_fitness:.6f}",
            f"best={self.history.best.fitness:.6f}",
            f"pattern_ratio_gain={self.optimized.counts.ratio - self.baseline.counts.ratio:+.6f}",
        ]
        return "\n".join(lines) + "\n"


def compare(table: InformationTable, config: GAConfig, split: float = 0.8) -> Comparison:
    """Split, then analyse equal-width and GA-optimized cuts on the same
    training part and score both rule sets on the held-out part."""
    train, test = stratified_split(table, split, config.seed)
    if len(train) == 0:
        raise ParameterError("training split is empty")
    baseline = analyse(train, equal_width(table.schema, config.bins), test)
    _, history = evolve(train, config)
    if history.best.fitness < history.baseline_fitness:
        raise StateError("GA best fitness fell below the equal-width fitness")
    optimized = analyse(train, history.best_cuts, test)
    return Comparison(table.schema, len(train), len(test), config, split, baseline, optimized,
                      history)


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.6f}"


def _section(a: Analysis) -> list[str]:
    lines = [
        f"pure_patterns={a.counts.pure}",
        f"mixed_patterns={a.counts.mixed}",
        f"total_patterns={a.counts.total}",
        f"pattern_ratio={a.counts.ratio:.6f}",
        f"alpha_positive={_fmt(a.alpha_positive)}",
        f"alpha_negative={_fmt(a.alpha_negative)}",
        f"certain_rules={len(a.rules.certain)}",
        f"possible_rules={len(a.rules.possible)}",
    ]
    if a.evaluation is not None:
        lines += [
            f"test_accuracy={_fmt(a.evaluation.accuracy)}",
            f"test_coverage={a.evaluation.coverage:.6f}",
            f"test_abstention={a.evaluation.abstention_rate:.6f}",
        ]
    for name, cs in a.cuts.cuts.items():
        lines.append(f"cuts.{name}=" + " ".join(f"{c:.6f}" for c in cs))
    return lines
