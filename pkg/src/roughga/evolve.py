"""Genetic search over discretization cut points.

Chromosomes are flat real vectors, ``bins - 1`` genes per numeric condition
attribute in schema order, decoded through :func:`repair`. Selection is
normalized geometric ranking, recombination is cycle crossover (or an
arithmetic blend), mutation redraws genes uniformly inside the attribute
bounds. All random draws happen in the driver; fitness evaluation is pure
and may run on a thread pool without changing results.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .data import MISSING, InformationTable, Kind, Role, Schema
from .discretize import (CutPointSet, bin_values, equal_width, numeric_conditions, repair,
                         table_contains)
from .errors import ConfigurationError, ParameterError, RangeError, StateError
from .rough import pattern_counts, positive_alpha

METRICS = ("alpha", "pattern")
CROSSOVERS = ("cyclic", "blend")


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 20
    generations: int = 100
    selection_q: float = 0.08
    mutation_rate: float = 0.05
    crossover_rate: float = 0.8
    elitism: bool = False
    metric: str = "alpha"
    seed: int = 0
    bins: int = 4
    crossover: str = "cyclic"
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 2:
            raise ParameterError("population size must be at least 2")
        if self.generations < 1:
            raise ParameterError("at least one generation required")
        if not 0.0 < self.selection_q < 1.0:
            raise ParameterError("selection q must lie in (0, 1)")
        for name in ("mutation_rate", "crossover_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1]")
        if self.metric not in METRICS:
            raise ParameterError(f"metric must be one of {METRICS}")
        if self.crossover not in CROSSOVERS:
            raise ParameterError(f"crossover must be one of {CROSSOVERS}")
        if self.bins < 2:
            raise ParameterError("at least two bins per attribute required")
        if self.workers < 1:
            raise ParameterError("workers must be positive")

    @classmethod
    def from_text(cls, stream: IO[str], **overrides) -> "GAConfig":
        """Read ``key = value`` lines; field names as in the dataclass."""
        parser = configparser.ConfigParser()
        try:
            parser.read_string("[ga]\n" + stream.read())
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse GA config: {exc}") from None
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in parser["ga"].items():
            key = key.replace("-", "_")
            if key not in types:
                raise ConfigurationError(f"unknown GA config key {key!r}")
            try:
                if types[key] == "bool":
                    values[key] = parser["ga"].getboolean(key)
                elif types[key] == "int":
                    values[key] = int(raw)
                elif types[key] == "float":
                    values[key] = float(raw)
                else:
                    values[key] = raw.strip()
            except ValueError as exc:
                raise ConfigurationError(f"{key}: {exc}") from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[float, ...]
    fitness: float | None = None


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float
    best_so_far: float


@dataclass
class EvolutionHistory:
    generations: list[GenerationStats] = field(default_factory=list)
    best: Chromosome | None = None
    best_cuts: CutPointSet | None = None
    baseline_fitness: float | None = None

    def to_csv(self) -> str:
        lines = ["generation,best,mean,best_so_far"]
        lines += [f"{g.generation},{g.best:.12f},{g.mean:.12f},{g.best_so_far:.12f}"
                  for g in self.generations]
        return "\n".join(lines) + "\n"


class FitnessEvaluator:
    """Scores gene vectors against one table.

    Column arrays and the categorical part of every pattern code are
    prepared once, so each evaluation is a handful of vectorized passes.
    """

    def __init__(self, table: InformationTable, bins: int = 4, metric: str = "alpha"):
        if metric not in METRICS:
            raise ParameterError(f"metric must be one of {METRICS}")
        self.schema = table.schema
        self.bins = bins
        self.metric = metric
        self.attributes = numeric_conditions(table.schema)
        for a in table.schema:
            col = table.columns[a.name]
            bad = np.flatnonzero(~table_contains(a, col))
            if bad.size:
                p = int(bad[0])
                value = table.records[p][table.index(a.name)]
                raise RangeError(table.ids[p], a.name, None if value is MISSING else value)

        base = np.zeros(len(table), dtype=np.int64)
        radix = 1
        for a in table.schema:
            if a.role is Role.CONDITION and a.kind is Kind.CATEGORICAL:
                base += np.searchsorted(np.sort(a.codes), table.columns[a.name]).astype(np.int64) * radix
                radix *= len(a.codes)
        self._base = base
        self._radix = radix
        self._numeric = [table.columns[a.name] for a in self.attributes]
        self._decisions = table.columns[table.decision_attribute.name].astype(np.int64)
        self.gene_count = (bins - 1) * len(self.attributes)

    def decode(self, genes: Sequence[float]) -> CutPointSet:
        return repair(genes, self.schema, self.bins)

    def counts(self, cuts: CutPointSet) -> tuple[np.ndarray, np.ndarray]:
        """Records and decision-1 records per pattern code."""
        code = self._base.copy()
        radix = self._radix
        for a, col in zip(self.attributes, self._numeric):
            code += bin_values(col, cuts[a.name]) * radix
            radix *= self.bins
        if radix <= 1 << 22:
            totals = np.bincount(code, minlength=radix)
            positives = np.bincount(code, weights=self._decisions, minlength=radix)
        else:
            _, inverse = np.unique(code, return_inverse=True)
            totals = np.bincount(inverse)
            positives = np.bincount(inverse, weights=self._decisions, minlength=totals.size)
        return totals, positives.astype(np.int64)

    def score_cuts(self, cuts: CutPointSet) -> float:
        totals, positives = self.counts(cuts)
        if self.metric == "pattern":
            ratio = pattern_counts(totals, positives).ratio
            return 0.0 if math.isnan(ratio) else ratio
        value = positive_alpha(totals, positives)
        return 0.0 if value is None else value

    def __call__(self, genes: Sequence[float]) -> float:
        return self.score_cuts(self.decode(genes))


def fitness(chromosome: Chromosome, table: InformationTable, config: GAConfig) -> float:
    return FitnessEvaluator(table, config.bins, config.metric)(chromosome.genes)


def _gene_bounds(schema: Schema, bins: int) -> tuple[np.ndarray, np.ndarray]:
    attrs = numeric_conditions(schema)
    lo = np.repeat([a.lower for a in attrs], bins - 1).astype(np.float64)
    hi = np.repeat([a.upper for a in attrs], bins - 1).astype(np.float64)
    return lo, hi


def _uniform_open(rng: np.random.Generator, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    x = rng.uniform(lo, hi)
    # uniform() is half-open; a draw landing exactly on the lower bound is nudged inside
    return np.where(x <= lo, np.nextafter(lo, hi), x)


def init_population(schema: Schema, config: GAConfig,
                    rng: np.random.Generator | None = None) -> list[Chromosome]:
    """Individual 0 is the equal-width chromosome; the rest are uniform draws."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    lo, hi = _gene_bounds(schema, config.bins)
    population = [Chromosome(tuple(equal_width(schema, config.bins).flatten(schema)))]
    for _ in range(config.population_size - 1):
        population.append(Chromosome(tuple(_uniform_open(rng, lo, hi).tolist())))
    return population


def selection_probabilities(size: int, q: float) -> np.ndarray:
    """Probability of drawing rank r (index r-1) under normalized geometric
    ranking: q' (1-q)^(r-1) with q' = q / (1 - (1-q)^size)."""
    ranks = np.arange(size)
    return q / (1.0 - (1.0 - q) ** size) * (1.0 - q) ** ranks


def rank_order(population: Sequence[Chromosome]) -> list[int]:
    """Indices sorted best first; equal fitness keeps the lower index first."""
    if any(c.fitness is None for c in population):
        raise StateError("every chromosome must be evaluated before selection")
    return sorted(range(len(population)), key=lambda i: -population[i].fitness)


def select(population: Sequence[Chromosome], config: GAConfig,
           rng: np.random.Generator) -> list[tuple[Chromosome, Chromosome]]:
    order = rank_order(population)
    probs = selection_probabilities(len(population), config.selection_q)
    draws = len(population) + len(population) % 2
    picked = rng.choice(len(population), size=draws, p=probs)
    parents = [population[order[r]] for r in picked]
    return list(zip(parents[::2], parents[1::2]))


def cycle_positions(a: Sequence[float], b: Sequence[float], start: int) -> list[int]:
    """Positions on the cycle through ``start``: follow b's value at the
    current position to where that value sits in a, until returning to the
    start. Real genes rarely close a cycle; the walk then stops at the first
    value with no unvisited match, or after len(a) steps."""
    cycle, seen = [start], {start}
    pos = start
    for _ in range(len(a)):
        v = b[pos]
        if v == a[start]:
            break
        nxt = next((j for j, x in enumerate(a) if x == v and j not in seen), None)
        if nxt is None:
            break
        cycle.append(nxt)
        seen.add(nxt)
        pos = nxt
    return cycle


def crossover(a: Chromosome, b: Chromosome, config: GAConfig,
              rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    n = len(a.genes)
    if len(b.genes) != n:
        raise ParameterError("parents must have the same number of genes")
    if rng.random() >= config.crossover_rate:
        return a, b
    if config.crossover == "blend":
        u = rng.random(n)
        ga, gb = np.asarray(a.genes), np.asarray(b.genes)
        return (Chromosome(tuple((u * ga + (1 - u) * gb).tolist())),
                Chromosome(tuple(((1 - u) * ga + u * gb).tolist())))
    cycle = set(cycle_positions(a.genes, b.genes, int(rng.integers(n))))
    ca = tuple(a.genes[i] if i in cycle else b.genes[i] for i in range(n))
    cb = tuple(b.genes[i] if i in cycle else a.genes[i] for i in range(n))
    return _carry(ca, a, b), _carry(cb, a, b)


def _carry(genes: tuple[float, ...], *parents: Chromosome) -> Chromosome:
    for p in parents:
        if p.genes == genes:
            return p
    return Chromosome(genes)


def mutate(chromosome: Chromosome, schema: Schema, config: GAConfig,
           rng: np.random.Generator) -> Chromosome:
    lo, hi = _gene_bounds(schema, config.bins)
    mask = rng.random(lo.size) < config.mutation_rate
    if not mask.any():
        return chromosome
    fresh = _uniform_open(rng, lo[mask], hi[mask])
    genes = np.asarray(chromosome.genes, dtype=np.float64)
    genes[mask] = fresh
    return Chromosome(tuple(genes.tolist()))


def evolve(table: InformationTable, config: GAConfig = GAConfig()
           ) -> tuple[Chromosome, EvolutionHistory]:
    """Generational GA; returns the best chromosome ever evaluated."""
    rng = np.random.default_rng(config.seed)
    evaluator = FitnessEvaluator(table, config.bins, config.metric)
    schema = table.schema
    cache: dict[tuple[float, ...], float] = {}
    history = EvolutionHistory()

    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None

    def evaluate(pop: list[Chromosome]) -> list[Chromosome]:
        todo = list(dict.fromkeys(c.genes for c in pop if c.fitness is None and c.genes not in cache))
        scores = pool.map(evaluator, todo) if pool else map(evaluator, todo)
        cache.update(zip(todo, scores))
        return [c if c.fitness is not None else Chromosome(c.genes, cache[c.genes]) for c in pop]

    try:
        population = init_population(schema, config, rng)
        best: Chromosome | None = None
        for gen in range(config.generations):
            population = evaluate(population)
            if gen == 0:
                history.baseline_fitness = population[0].fitness
            scores = [c.fitness for c in population]
            leader = population[int(np.argmax(scores))]
            if best is None or leader.fitness > best.fitness:
                best = leader
            history.generations.append(
                GenerationStats(gen, leader.fitness, float(np.mean(scores)), best.fitness))
            if gen == config.generations - 1:
                break
            offspring: list[Chromosome] = []
            for pa, pb in select(population, config, rng):
                ca, cb = crossover(pa, pb, config, rng)
                offspring.append(mutate(ca, schema, config, rng))
                offspring.append(mutate(cb, schema, config, rng))
            offspring = offspring[:config.population_size]
            if config.elitism:
                offspring = [leader] + offspring[:-1]
            population = offspring
    finally:
        if pool:
            pool.shutdown()

    history.best = best
    history.best_cuts = evaluator.decode(best.genes)
    return best, history
