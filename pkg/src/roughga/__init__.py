"""Rough set rule induction with GA-optimized discretization cut points."""

from .data import (MISSING, AttributeSchema, CleaningReport, Condition, InformationTable, Kind,
                   Role, SynthSpec, clean, hiv_schema, load_table, synthesize)
from .discretize import CutPointSet, DiscretizedTable, apply, equal_width, repair
from .evolve import Chromosome, EvolutionHistory, GAConfig, fitness
from .rough import (ApproximationPair, EquivalenceClassPartition, InformationSystem, accuracy,
                    lower_approx, membership, partition, pattern_consistency, upper_approx)
from .rules import Rule, RuleSet, evaluate, extract, predict, render

__version__ = "0.1.0"
