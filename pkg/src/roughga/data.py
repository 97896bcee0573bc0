"""Tabular data model: attribute schemas, information tables, cleaning and
synthetic survey-shaped data."""

from __future__ import annotations

import configparser
import csv
import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .errors import ConfigurationError, ParameterError, RowError, SchemaError


class Kind(str, enum.Enum):
    CATEGORICAL = "categorical"
    INTEGER = "numeric-integer"
    REAL = "numeric-real"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        aliases = {"integer": cls.INTEGER, "int": cls.INTEGER, "real": cls.REAL, "float": cls.REAL}
        text = text.strip().lower()
        if text in aliases:
            return aliases[text]
        try:
            return cls(text)
        except ValueError:
            raise SchemaError(f"unknown attribute kind {text!r}") from None


class Role(str, enum.Enum):
    CONDITION = "condition"
    DECISION = "decision"


class _Missing(enum.Enum):
    MISSING = "?"

    def __repr__(self) -> str:
        return "MISSING"


#: Marker stored in place of an absent or unreadable value.
MISSING = _Missing.MISSING

Value = Union[int, float, _Missing]


@dataclass(frozen=True)
class AttributeSchema:
    """One column of an information table.

    Categorical attributes carry integer ``codes`` with parallel display
    ``labels``; numeric attributes carry inclusive ``lower``/``upper`` bounds.
    """

    name: str
    kind: Kind
    role: Role = Role.CONDITION
    codes: tuple[int, ...] = ()
    labels: tuple[str, ...] = ()
    lower: float | None = None
    upper: float | None = None
    label: str | None = None

    def __post_init__(self):
        if not self.name or "," in self.name:
            raise SchemaError(f"invalid attribute name {self.name!r}")
        if self.kind is Kind.CATEGORICAL:
            if not self.codes:
                raise SchemaError(f"{self.name}: categorical code set is empty")
            if len(set(self.codes)) != len(self.codes):
                raise SchemaError(f"{self.name}: duplicate categorical codes")
            if self.labels and len(self.labels) != len(self.codes):
                raise SchemaError(f"{self.name}: one label per code required")
        else:
            if self.lower is None or self.upper is None:
                raise SchemaError(f"{self.name}: numeric attribute needs bounds")
            if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
                raise SchemaError(f"{self.name}: bounds must be finite")
            if not self.lower < self.upper:
                raise SchemaError(f"{self.name}: lower bound must be below upper bound")
        if self.role is Role.DECISION and (
            self.kind is not Kind.CATEGORICAL or sorted(self.codes) != [0, 1]
        ):
            raise SchemaError(f"{self.name}: decision attribute must be categorical over {{0, 1}}")

    @classmethod
    def categorical(cls, name: str, labels: dict[int, str], role: Role = Role.CONDITION,
                    label: str | None = None) -> "AttributeSchema":
        codes = tuple(labels)
        return cls(name, Kind.CATEGORICAL, role, codes=codes,
                   labels=tuple(labels[c] for c in codes), label=label)

    @classmethod
    def numeric(cls, name: str, lower: float, upper: float, integer: bool = True,
                label: str | None = None) -> "AttributeSchema":
        kind = Kind.INTEGER if integer else Kind.REAL
        return cls(name, kind, Role.CONDITION, lower=lower, upper=upper, label=label)

    @property
    def is_numeric(self) -> bool:
        return self.kind is not Kind.CATEGORICAL

    @property
    def display(self) -> str:
        return self.label or self.name.replace("_", " ").title()

    def code_label(self, code: int) -> str:
        if self.labels:
            return self.labels[self.codes.index(code)]
        return str(code)

    def contains(self, value: Value) -> bool:
        if value is MISSING:
            return False
        if self.kind is Kind.CATEGORICAL:
            return value in self.codes
        return self.lower <= value <= self.upper

    def parse(self, text: str) -> Value:
        """Parse one cell; anything unreadable or out of domain becomes MISSING."""
        text = text.strip()
        if text in ("", "?"):
            return MISSING
        if self.kind is Kind.CATEGORICAL:
            try:
                value: Value = int(text)
            except ValueError:
                lowered = [lab.lower() for lab in self.labels]
                if text.lower() not in lowered:
                    return MISSING
                value = self.codes[lowered.index(text.lower())]
        else:
            try:
                number = float(text)
            except ValueError:
                return MISSING
            if not math.isfinite(number):
                return MISSING
            if self.kind is Kind.INTEGER:
                if not number.is_integer():
                    return MISSING
                value = int(number)
            else:
                value = number
        return value if self.contains(value) else MISSING


Schema = Sequence[AttributeSchema]


def validate_schema(schema: Schema) -> tuple[AttributeSchema, ...]:
    schema = tuple(schema)
    names = [a.name for a in schema]
    if len(set(names)) != len(names):
        raise SchemaError("attribute names must be unique")
    decisions = [a for a in schema if a.role is Role.DECISION]
    if len(decisions) != 1:
        raise SchemaError(f"exactly one decision attribute required, found {len(decisions)}")
    if len(schema) < 2:
        raise SchemaError("schema needs at least one condition attribute")
    return schema


def hiv_schema(continuous: bool = False) -> tuple[AttributeSchema, ...]:
    """The six demographic attributes of the antenatal survey plus HIV status.

    ``continuous`` makes the numeric attributes real-valued instead of integer.
    """
    integer = not continuous
    return (
        AttributeSchema.categorical(
            "race", {1: "White", 2: "African", 3: "Coloured", 4: "Asian"}, label="Race"),
        AttributeSchema.numeric("mothers_age", 13, 50, integer, label="Mothers Age"),
        AttributeSchema.numeric("education", 0, 13, integer, label="Education"),
        AttributeSchema.numeric("gravidity", 0, 10, integer, label="Gravidity"),
        AttributeSchema.numeric("parity", 0, 10, integer, label="Parity"),
        AttributeSchema.numeric("fathers_age", 15, 70, integer, label="Fathers Age"),
        AttributeSchema.categorical(
            "hiv_status", {0: "Negative", 1: "Positive"}, role=Role.DECISION, label="HIV"),
    )


# Schema sidecar file: CSV with columns name,kind,role,domain,label.
# Numeric domain is "lo..hi"; categorical domain is "1=White;2=African".
_SCHEMA_FIELDS = ("name", "kind", "role", "domain", "label")


def read_schema(stream: IO[str]) -> tuple[AttributeSchema, ...]:
    reader = csv.DictReader(line for line in stream if not line.lstrip().startswith("#"))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:4]] != list(_SCHEMA_FIELDS[:4]):
        raise SchemaError(f"schema file header must be {','.join(_SCHEMA_FIELDS)}")
    attrs = []
    for row in reader:
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        kind = Kind.parse(row["kind"])
        try:
            role = Role(row["role"].lower())
        except ValueError:
            raise SchemaError(f"{row['name']}: unknown role {row['role']!r}") from None
        label = row.get("label") or None
        if kind is Kind.CATEGORICAL:
            codes, labels = [], []
            for item in filter(None, row["domain"].split(";")):
                code, _, lab = item.partition("=")
                try:
                    codes.append(int(code))
                except ValueError:
                    raise SchemaError(f"{row['name']}: bad categorical code {code!r}") from None
                labels.append(lab.strip() or code.strip())
            attrs.append(AttributeSchema(row["name"], kind, role, codes=tuple(codes),
                                         labels=tuple(labels), label=label))
        else:
            lo, sep, hi = row["domain"].partition("..")
            try:
                lower, upper = float(lo), float(hi)
            except ValueError:
                raise SchemaError(f"{row['name']}: numeric domain must be 'lo..hi'") from None
            if not sep:
                raise SchemaError(f"{row['name']}: numeric domain must be 'lo..hi'")
            attrs.append(AttributeSchema(row["name"], kind, role, lower=lower,
                                         upper=upper, label=label))
    return validate_schema(attrs)


def write_schema(schema: Schema, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_SCHEMA_FIELDS)
    for a in schema:
        if a.kind is Kind.CATEGORICAL:
            domain = ";".join(f"{c}={a.code_label(c)}" for c in a.codes)
        else:
            domain = f"{_fmt(a.lower)}..{_fmt(a.upper)}"
        writer.writerow((a.name, a.kind.value, a.role.value, domain, a.label or ""))


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class InformationTable:
    """Ordered records over a schema; ``ids`` survive cleaning unchanged."""

    schema: tuple[AttributeSchema, ...]
    records: tuple[tuple[Value, ...], ...]
    ids: tuple[int, ...] = None

    def __post_init__(self):
        object.__setattr__(self, "schema", validate_schema(self.schema))
        object.__setattr__(self, "records", tuple(tuple(r) for r in self.records))
        if self.ids is None:
            object.__setattr__(self, "ids", tuple(range(len(self.records))))
        else:
            object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) != len(self.records):
            raise SchemaError("one id per record required")
        if len(set(self.ids)) != len(self.ids):
            raise SchemaError("record ids must be unique")
        width = len(self.schema)
        for rid, rec in zip(self.ids, self.records):
            if len(rec) != width:
                raise SchemaError(f"record {rid} has {len(rec)} values, schema has {width}")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)

    @property
    def decision_index(self) -> int:
        return next(i for i, a in enumerate(self.schema) if a.role is Role.DECISION)

    @property
    def decision_attribute(self) -> AttributeSchema:
        return self.schema[self.decision_index]

    @property
    def conditions(self) -> tuple[AttributeSchema, ...]:
        return tuple(a for a in self.schema if a.role is Role.CONDITION)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"no attribute named {name!r}") from None

    def has_missing(self) -> bool:
        return any(v is MISSING for rec in self.records for v in rec)

    @cached_property
    def columns(self) -> dict[str, np.ndarray]:
        """Column arrays (float64, NaN for missing); built once per table."""
        out = {}
        for j, a in enumerate(self.schema):
            col = np.array([np.nan if r[j] is MISSING else r[j] for r in self.records],
                           dtype=np.float64)
            col.setflags(write=False)
            out[a.name] = col
        return out

    def subset(self, positions: Iterable[int]) -> "InformationTable":
        positions = list(positions)
        return InformationTable(self.schema, [self.records[p] for p in positions],
                                [self.ids[p] for p in positions])


def load_table(source: IO, schema: Schema) -> InformationTable:
    """Read comma-separated text with a header naming every schema attribute.

    Columns may appear in any order; records are stored in schema order.
    """
    schema = validate_schema(schema)
    if isinstance(source, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("input has no header row") from None
    names = [a.name for a in schema]
    if sorted(header) != sorted(names):
        missing = sorted(set(names) - set(header))
        extra = sorted(set(header) - set(names))
        raise SchemaError(f"header does not match schema (missing {missing}, unexpected {extra})")
    order = [header.index(n) for n in names]
    records = []
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise RowError(f"expected {len(header)} fields, found {len(row)}", reader.line_num)
        records.append(tuple(a.parse(row[i]) for a, i in zip(schema, order)))
    return InformationTable(schema, records)


def write_table(table: InformationTable, stream: IO[str], with_ids: bool = False) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow((("id",) if with_ids else ()) + table.names)
    for rid, rec in zip(table.ids, table.records):
        cells = ["?" if v is MISSING else repr(v) for v in rec]
        writer.writerow(([rid] if with_ids else []) + cells)


@dataclass(frozen=True)
class CleaningReport:
    input_count: int
    removed_missing: int
    removed_gravidity_parity: int
    output_count: int

    def __post_init__(self):
        if self.output_count != self.input_count - self.removed_missing - self.removed_gravidity_parity:
            raise AssertionError("cleaning counts do not reconcile")

    def to_text(self) -> str:
        return (
            f"input_count={self.input_count}\n"
            f"removed_missing={self.removed_missing}\n"
            f"removed_gravidity_parity={self.removed_gravidity_parity}\n"
            f"output_count={self.output_count}\n"
        )


def clean(table: InformationTable, check_consistency: bool = True,
          gravidity: str = "gravidity", parity: str = "parity"
          ) -> tuple[InformationTable, CleaningReport]:
    """Drop records with missing values, then records whose parity is
    impossible given gravidity (zero pregnancies with births, or more births
    than pregnancies). A record is counted under the first rule it breaks."""
    gi = pi = None
    if check_consistency:
        if gravidity not in table.names or parity not in table.names:
            raise ConfigurationError(
                f"consistency checks need {gravidity!r} and {parity!r} attributes")
        gi, pi = table.index(gravidity), table.index(parity)

    keep = []
    n_missing = n_gp = 0
    for pos, rec in enumerate(table.records):
        if any(v is MISSING for v in rec):
            n_missing += 1
        elif gi is not None and ((rec[gi] == 0 and rec[pi] >= 1) or rec[pi] > rec[gi]):
            n_gp += 1
        else:
            keep.append(pos)
    report = CleaningReport(len(table), n_missing, n_gp, len(keep))
    return table.subset(keep), report


@dataclass(frozen=True)
class Condition:
    """``attribute op threshold`` with op one of ``>``, ``>=``, ``<``, ``<=``."""

    attribute: str
    op: str
    threshold: float

    _OPS = {">": np.greater, ">=": np.greater_equal, "<": np.less, "<=": np.less_equal}

    def __post_init__(self):
        if self.op not in self._OPS:
            raise ParameterError(f"unsupported comparison {self.op!r}")

    def holds(self, values: np.ndarray) -> np.ndarray:
        return self._OPS[self.op](values, self.threshold)

    @classmethod
    def parse(cls, text: str) -> "Condition":
        for op in (">=", "<=", ">", "<"):
            left, sep, right = text.partition(op)
            if sep:
                try:
                    return cls(left.strip(), op, float(right))
                except ValueError:
                    break
        raise ParameterError(f"cannot parse condition {text!r}")

    def __str__(self) -> str:
        return f"{self.attribute} {self.op} {_fmt(self.threshold)}"


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic table.

    The decision is 1 exactly when every planted condition holds (or a fair
    coin when there are none), then flipped independently with ``noise``.
    """

    record_count: int
    schema: tuple[AttributeSchema, ...] = field(default_factory=hiv_schema)
    planted: tuple[Condition, ...] = ()
    noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "schema", validate_schema(self.schema))
        object.__setattr__(self, "planted", tuple(self.planted))
        if self.record_count < 0:
            raise ParameterError("record count must be non-negative")
        if not 0.0 <= self.noise < 0.5:
            raise ParameterError("noise rate must lie in [0, 0.5)")
        by_name = {a.name: a for a in self.schema}
        for cond in self.planted:
            attr = by_name.get(cond.attribute)
            if attr is None or attr.role is not Role.CONDITION or not attr.is_numeric:
                raise ParameterError(f"planted condition needs a numeric condition attribute: {cond}")
            if not attr.lower < cond.threshold < attr.upper:
                raise ParameterError(f"planted threshold must lie strictly inside bounds: {cond}")


def read_synth_spec(stream: IO[str], schema: Schema | None = None) -> SynthSpec:
    """Parse a key-value synthetic spec, e.g.::

        records = 10000
        noise = 0.05
        rule = mothers_age > 25 and education < 7
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string("[synth]\n" + stream.read())
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse synthetic spec: {exc}") from None
    section = parser["synth"]
    unknown = set(section) - {"records", "noise", "rule"}
    if unknown:
        raise ConfigurationError(f"unknown synthetic spec keys: {sorted(unknown)}")
    try:
        records = int(section.get("records", "1000"))
        noise = float(section.get("noise", "0"))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    rule = section.get("rule", "").strip()
    planted = tuple(Condition.parse(part) for part in rule.split(" and ")) if rule else ()
    return SynthSpec(records, tuple(schema) if schema is not None else hiv_schema(),
                     planted, noise)


def planted_decisions(spec: SynthSpec, table: InformationTable) -> np.ndarray:
    """Noise-free decisions the planted rule assigns to each record."""
    holds = np.ones(len(table), dtype=bool)
    for cond in spec.planted:
        holds &= cond.holds(table.columns[cond.attribute])
    return holds.astype(np.int64)


def synthesize(spec: SynthSpec, seed: int) -> InformationTable:
    rng = np.random.default_rng(seed)
    n = spec.record_count
    columns: dict[str, np.ndarray] = {}
    for a in spec.schema:
        if a.role is Role.DECISION:
            continue
        if a.kind is Kind.CATEGORICAL:
            columns[a.name] = rng.choice(np.array(a.codes), size=n)
        elif a.kind is Kind.INTEGER:
            columns[a.name] = rng.integers(math.ceil(a.lower), math.floor(a.upper), size=n,
                                           endpoint=True)
        else:
            columns[a.name] = rng.uniform(a.lower, a.upper, size=n)
    if spec.planted:
        decision = np.ones(n, dtype=np.int64)
        for cond in spec.planted:
            decision &= cond.holds(columns[cond.attribute])
    else:
        decision = rng.integers(0, 2, size=n)
    decision ^= (rng.random(n) < spec.noise).astype(decision.dtype)

    dname = next(a.name for a in spec.schema if a.role is Role.DECISION)
    columns[dname] = decision
    as_py = []
    for a in spec.schema:
        col = columns[a.name]
        as_py.append(col.tolist() if a.kind is not Kind.REAL else [float(v) for v in col])
    return InformationTable(spec.schema, list(zip(*as_py)) if n else [])
