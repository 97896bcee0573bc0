"""Command-line driver.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

from . import data, discretize, evolve, pipeline, rules
from .errors import (ConfigurationError, ParameterError, RangeError, RowError, SchemaError,
                     StateError)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _schema(path: str | None):
    if path is None or path == "hiv":
        return data.hiv_schema()
    if path == "hiv-continuous":
        return data.hiv_schema(continuous=True)
    with open(path, encoding="utf-8") as fh:
        return data.read_schema(fh)


def _table(path: str, schema):
    with open(path, "rb") as fh:
        return data.load_table(fh, schema)


def _cuts(path: str | None, schema, bins: int) -> discretize.CutPointSet:
    if path is None:
        return discretize.equal_width(schema, bins)
    with open(path, encoding="utf-8") as fh:
        cuts = discretize.CutPointSet.from_text(fh)
    cuts.validate(schema)
    return cuts


def _ga_config(args) -> evolve.GAConfig:
    overrides = dict(seed=args.seed, bins=args.bins, metric=args.metric,
                     population_size=args.population, generations=args.generations,
                     workers=args.workers, elitism=True if args.elitism else None)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            return evolve.GAConfig.from_text(fh, **overrides)
    return evolve.GAConfig(**{k: v for k, v in overrides.items() if v is not None})


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_clean(args) -> int:
    schema = _schema(args.schema)
    table = _table(args.input, schema)
    cleaned, report = data.clean(table, check_consistency=not args.no_consistency)
    out = Path(args.out)
    buf = io.StringIO()
    data.write_table(cleaned, buf)
    _write(out / "cleaned.csv", buf.getvalue())
    _write(out / "cleaning_report.txt", report.to_text())
    print(f"kept {report.output_count} of {report.input_count} records "
          f"(missing: {report.removed_missing}, gravidity/parity: {report.removed_gravidity_parity})")
    return EXIT_OK


def cmd_synth(args) -> int:
    schema = _schema(args.schema)
    with open(args.spec, encoding="utf-8") as fh:
        spec = data.read_synth_spec(fh, schema)
    table = data.synthesize(spec, args.seed)
    buf = io.StringIO()
    data.write_table(table, buf)
    _write(Path(args.out), buf.getvalue())
    positives = sum(r[table.decision_index] for r in table.records)
    print(f"wrote {len(table)} records ({positives} with decision 1) to {args.out}")
    return EXIT_OK


def cmd_discretize(args) -> int:
    schema = _schema(args.schema)
    table = _table(args.input, schema)
    cuts = _cuts(args.cuts, schema, args.bins)
    binned = discretize.apply(table, cuts)
    buf = io.StringIO()
    data.write_table(data.InformationTable(
        tuple(_as_code_schema(a, cuts.k) for a in schema), binned.records, binned.ids),
        buf, with_ids=True)
    out = Path(args.out)
    _write(out / "discretized.csv", buf.getvalue())
    _write(out / "cuts.txt", cuts.to_text())
    print(f"discretized {len(binned)} records into {cuts.k} bins per numeric attribute")
    return EXIT_OK


def _as_code_schema(attr: data.AttributeSchema, k: int) -> data.AttributeSchema:
    if not attr.is_numeric:
        return attr
    return data.AttributeSchema(attr.name, data.Kind.INTEGER, attr.role, lower=0,
                                upper=max(k - 1, 1), label=attr.label)


def cmd_optimize(args) -> int:
    schema = _schema(args.schema)
    table = _table(args.input, schema)
    config = _ga_config(args)
    best, history = evolve.evolve(table, config)
    if history.best.fitness < history.baseline_fitness:
        raise StateError("GA best fitness fell below the equal-width fitness")
    out = Path(args.out)
    _write(out / "cuts.txt", history.best_cuts.to_text())
    _write(out / "history.csv", history.to_csv())
    print(f"{config.metric} fitness: equal-width {history.baseline_fitness:.6f}, "
          f"best {best.fitness:.6f} after {config.generations} generations")
    return EXIT_OK


def cmd_rules(args) -> int:
    schema = _schema(args.schema)
    table = _table(args.input, schema)
    cuts = _cuts(args.cuts, schema, args.bins)
    result = pipeline.analyse(table, cuts)
    out = Path(args.out)
    _write(out / "rules.jsonl", result.rules.to_jsonl())
    _write(out / "rules.txt", rules.render_all(result.rules, schema))
    print(f"{len(result.rules.certain)} certain and {len(result.rules.possible)} possible rules; "
          f"pattern ratio {result.counts.pure}/{result.counts.total} = {result.counts.ratio:.6f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    schema = _schema(args.schema)
    with open(args.rules, encoding="utf-8") as fh:
        ruleset = rules.RuleSet.from_jsonl(fh.read())
    if ruleset.cuts is None:
        raise ParameterError("rule file carries no cut points")
    table = _table(args.input, schema)
    result = rules.evaluate(ruleset, discretize.apply(table, ruleset.cuts))
    acc = "n/a" if result.accuracy is None else f"{result.accuracy:.6f}"
    text = (f"records={result.records}\naccuracy={acc}\ncoverage={result.coverage:.6f}\n"
            f"abstention_rate={result.abstention_rate:.6f}\n")
    if args.out:
        _write(Path(args.out) / "evaluation.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_compare(args) -> int:
    schema = _schema(args.schema)
    table = _table(args.input, schema)
    config = _ga_config(args)
    result = pipeline.compare(table, config, args.split)
    out = Path(args.out)
    report = result.to_text()
    _write(out / "report.txt", report)
    _write(out / "history.csv", result.history.to_csv())
    for tag, a in (("equal_width", result.baseline), ("optimized", result.optimized)):
        _write(out / f"rules_{tag}.jsonl", a.rules.to_jsonl())
        _write(out / f"rules_{tag}.txt", rules.render_all(a.rules, schema))
        _write(out / f"cuts_{tag}.txt", a.cuts.to_text())
    sys.stdout.write(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="roughga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed_required=False):
        p.add_argument("--schema", help="schema CSV file, or 'hiv' / 'hiv-continuous' "
                                        "(default: built-in HIV survey schema)")
        p.add_argument("--out", required=True, help="output directory")
        if seed_required:
            p.add_argument("--seed", type=int, required=True)

    def ga_flags(p):
        p.add_argument("--bins", type=int, default=None, help="bins per numeric attribute (4)")
        p.add_argument("--metric", choices=evolve.METRICS, default=None)
        p.add_argument("--config", help="GA config file (key = value lines)")
        p.add_argument("--population", type=int, default=None)
        p.add_argument("--generations", type=int, default=None)
        p.add_argument("--elitism", action="store_true")
        p.add_argument("--workers", type=int, default=None,
                       help="threads for fitness evaluation (results do not depend on it)")

    p = sub.add_parser("clean", help="drop missing and inconsistent records")
    p.add_argument("--input", required=True)
    p.add_argument("--no-consistency", action="store_true",
                   help="skip the gravidity/parity checks")
    common(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("synth", help="generate a synthetic table")
    p.add_argument("--spec", required=True, help="synthetic spec file (key = value lines)")
    p.add_argument("--schema")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("discretize", help="bin a table with given or equal-width cuts")
    p.add_argument("--input", required=True)
    p.add_argument("--cuts", help="cut point file (default: equal width)")
    p.add_argument("--bins", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("optimize", help="search cut points with the GA")
    p.add_argument("--input", required=True)
    common(p, seed_required=True)
    ga_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("rules", help="extract certain and possible rules")
    p.add_argument("--input", required=True)
    p.add_argument("--cuts", help="cut point file (default: equal width)")
    p.add_argument("--bins", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("evaluate", help="score a rule file on a table")
    p.add_argument("--rules", required=True, help="rules.jsonl written by 'rules' or 'compare'")
    p.add_argument("--input", required=True)
    p.add_argument("--schema")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="equal-width vs GA-optimized report")
    p.add_argument("--input", required=True)
    p.add_argument("--split", type=float, default=0.8, help="training fraction (0.8)")
    common(p, seed_required=True)
    ga_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, RowError, RangeError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (StateError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
