"""LIAR / LIAR-Plus ingestion: parsing, label collapse, imputation and splits.

Column layout (tab separated, no header, no quoting)::

    id, label, statement, subject, speaker, job, state, party,
    barely_true_count, false_count, half_true_count, mostly_true_count,
    pants_on_fire_count, context[, justification]

LIAR-Plus appends the justification column. The files published with
LIAR-Plus additionally carry a leading row-number column; it is accepted
and discarded.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

UNKNOWN = "<unk>"

VARIANTS = ("liar", "liar-plus")

COLUMNS = (
    "id",
    "label",
    "statement",
    "subject",
    "speaker",
    "job",
    "state",
    "party",
    "btc",
    "fc",
    "htc",
    "mtc",
    "pfc",
    "context",
)
COUNT_FIELDS = ("btc", "fc", "htc", "mtc", "pfc")
CATEGORICAL_FIELDS = ("subject", "speaker", "job", "state", "party", "context")


class CorpusError(ValueError):
    """Raised for malformed corpus input or invalid split requests."""


class ParseError(CorpusError):
    def __init__(self, path, row: int, column: str, message: str):
        self.path = str(path)
        self.row = row
        self.column = column
        super().__init__(f"{self.path}: row {row}, column {column!r}: {message}")


class LabelSix(IntEnum):
    PANTS_ON_FIRE = 0
    FALSE = 1
    BARELY_TRUE = 2
    HALF_TRUE = 3
    MOSTLY_TRUE = 4
    TRUE = 5

    @property
    def text(self) -> str:
        return _LABEL_TEXT[self]


class LabelBinary(IntEnum):
    FALSE = 0
    TRUE = 1


_LABEL_TEXT = {
    LabelSix.PANTS_ON_FIRE: "pants-fire",
    LabelSix.FALSE: "false",
    LabelSix.BARELY_TRUE: "barely-true",
    LabelSix.HALF_TRUE: "half-true",
    LabelSix.MOSTLY_TRUE: "mostly-true",
    LabelSix.TRUE: "true",
}

_LABEL_LOOKUP = {text: label for label, text in _LABEL_TEXT.items()}
_LABEL_LOOKUP["pants-on-fire"] = LabelSix.PANTS_ON_FIRE


def parse_label(text: str) -> LabelSix:
    key = "-".join(text.strip().lower().replace("_", " ").split())
    try:
        return _LABEL_LOOKUP[key]
    except KeyError:
        raise ValueError(f"unknown label string {text!r}") from None


def to_binary(label: LabelSix) -> LabelBinary:
    return LabelBinary.FALSE if label <= LabelSix.BARELY_TRUE else LabelBinary.TRUE


def class_index(label: LabelSix, label_space: str) -> int:
    """Training target for ``label``.

    Six-way targets are the ordinal value. Binary targets put fake news
    (the FALSE group) on the positive class 1.
    """
    if label_space == "six":
        return int(label)
    if label_space == "binary":
        return 1 if to_binary(label) is LabelBinary.FALSE else 0
    raise ValueError(f"unknown label space {label_space!r}")


@dataclass(frozen=True)
class CreditCounts:
    btc: float = 0
    fc: float = 0
    htc: float = 0
    mtc: float = 0
    pfc: float = 0

    def as_tuple(self) -> tuple:
        return (self.btc, self.fc, self.htc, self.mtc, self.pfc)


@dataclass(frozen=True)
class Record:
    id: str
    label: LabelSix
    statement: str
    subject: tuple = ()
    speaker: str | None = None
    job: str | None = None
    state: str | None = None
    party: str | None = None
    # a missing count is None until imputed
    counts: tuple = (0, 0, 0, 0, 0)
    context: str | None = None
    justification: str | None = None

    @property
    def credit(self) -> CreditCounts:
        if any(c is None for c in self.counts):
            raise CorpusError(f"record {self.id}: credit counts missing; impute first")
        return CreditCounts(*self.counts)

    def has_missing(self) -> bool:
        return (
            not self.subject
            or any(getattr(self, f) is None for f in ("speaker", "job", "state", "party", "context"))
            or any(c is None for c in self.counts)
        )


def _optional(value: str) -> str | None:
    value = value.strip()
    return value if value else None


def _parse_count(value: str, path, row: int, column: str):
    value = value.strip()
    if not value:
        return None
    try:
        number = float(value)
    except ValueError:
        raise ParseError(path, row, column, f"non-integer count {value!r}") from None
    if not math.isfinite(number) or number != int(number) or number < 0:
        raise ParseError(path, row, column, f"non-integer count {value!r}")
    return int(number)


def parse_row(fields: Sequence[str], variant: str, path="<row>", row: int = 1) -> Record:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    expected = len(COLUMNS) + (variant == "liar-plus")
    if variant == "liar-plus" and len(fields) == expected + 1:
        fields = fields[1:]
    if len(fields) != expected:
        raise ParseError(path, row, "*", f"expected {expected} columns, found {len(fields)}")
    values = dict(zip(COLUMNS, fields))
    try:
        label = parse_label(values["label"])
    except ValueError as err:
        raise ParseError(path, row, "label", str(err)) from None
    statement = values["statement"].strip()
    if not statement:
        raise ParseError(path, row, "statement", "empty statement")
    subject = tuple(s.strip() for s in values["subject"].split(",") if s.strip())
    counts = tuple(_parse_count(values[c], path, row, c) for c in COUNT_FIELDS)
    justification = None
    if variant == "liar-plus":
        justification = fields[-1].strip()
    return Record(
        id=values["id"].strip(),
        label=label,
        statement=statement,
        subject=subject,
        speaker=_optional(values["speaker"]),
        job=_optional(values["job"]),
        state=_optional(values["state"]),
        party=_optional(values["party"]),
        counts=counts,
        context=_optional(values["context"]),
        justification=justification,
    )


def parse_liar(path, variant: str = "liar") -> list[Record]:
    """Parse a LIAR or LIAR-Plus TSV file.

    Row numbers in errors are 1-based physical lines. Blank lines are skipped.
    """
    path = Path(path)
    records = []
    with path.open(encoding="utf-8", newline="") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            records.append(parse_row(line.split("\t"), variant, path, row))
    return records


def _format_count(value) -> str:
    if value is None:
        return ""
    if float(value) == int(value):
        return str(int(value))
    return repr(float(value))


def format_row(record: Record, variant: str) -> str:
    fields = [
        record.id,
        record.label.text,
        record.statement,
        ",".join(record.subject),
        record.speaker or "",
        record.job or "",
        record.state or "",
        record.party or "",
        *(_format_count(c) for c in record.counts),
        record.context or "",
    ]
    if variant == "liar-plus":
        fields.append(record.justification or "")
    for value in fields:
        if "\t" in value or "\n" in value:
            raise CorpusError(f"record {record.id}: field contains a tab or newline")
    return "\t".join(fields)


def write_tsv(records: Iterable[Record], path, variant: str) -> None:
    """Write records in the normalized layout (no row-number column)."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(format_row(record, variant) + "\n")


@dataclass(frozen=True)
class TrainingStats:
    count_means: tuple

    @classmethod
    def from_records(cls, records: Sequence[Record]) -> "TrainingStats":
        if not records:
            raise CorpusError("cannot compute imputation statistics from an empty training set")
        means = []
        for i, name in enumerate(COUNT_FIELDS):
            present = [r.counts[i] for r in records if r.counts[i] is not None]
            means.append(float(np.mean(present)) if present else 0.0)
        return cls(tuple(means))


def impute_missing(records: Sequence[Record], stats: TrainingStats) -> list[Record]:
    """Fill missing counts with training means and missing categories with UNKNOWN."""
    out = []
    for r in records:
        if not r.has_missing():
            out.append(r)
            continue
        counts = tuple(m if c is None else c for c, m in zip(r.counts, stats.count_means))
        out.append(
            replace(
                r,
                subject=r.subject or (UNKNOWN,),
                speaker=r.speaker or UNKNOWN,
                job=r.job or UNKNOWN,
                state=r.state or UNKNOWN,
                party=r.party or UNKNOWN,
                context=r.context or UNKNOWN,
                counts=counts,
            )
        )
    return out


def labels_of(records: Sequence[Record], label_space: str) -> np.ndarray:
    return np.array([class_index(r.label, label_space) for r in records], dtype=np.int64)


def stratified_folds(records_or_labels, k: int, seed: int, label_space: str = "six"):
    """Return ``k`` (train, test) index pairs with class-balanced test folds.

    Each class is shuffled with a seeded generator and dealt round-robin;
    the starting fold rotates across classes so total fold sizes stay
    balanced too.
    """
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    if len(records_or_labels) and isinstance(records_or_labels[0], Record):
        y = labels_of(records_or_labels, label_space)
    else:
        y = np.asarray(records_or_labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if len(members) < k:
            raise CorpusError(f"class {cls} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        assignment[members] = (np.arange(len(members)) + offset) % k
        offset = (offset + len(members)) % k
    all_idx = np.arange(len(y))
    return [(all_idx[assignment != f], all_idx[assignment == f]) for f in range(k)]


@dataclass
class SplitSpec:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int = 0
    ids: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.train = np.asarray(self.train, dtype=np.int64)
        self.validation = np.asarray(self.validation, dtype=np.int64)
        self.test = np.asarray(self.test, dtype=np.int64)
        combined = np.concatenate([self.train, self.validation, self.test])
        if len(np.unique(combined)) != len(combined):
            raise CorpusError("split partitions overlap")
        if len(combined) and not np.array_equal(np.sort(combined), np.arange(len(combined))):
            raise CorpusError("split partitions do not cover the record range exactly")

    @classmethod
    def from_partitions(cls, train, validation, test, seed: int = 0):
        """Concatenate three record lists; returns (records, split)."""
        records = list(train) + list(validation) + list(test)
        n1, n2 = len(train), len(train) + len(validation)
        split = cls(np.arange(n1), np.arange(n1, n2), np.arange(n2, len(records)), seed)
        split.ids = [r.id for r in records]
        return records, split

    def manifest(self) -> dict:
        ids = self.ids or [str(i) for i in range(len(self.train) + len(self.validation) + len(self.test))]
        return {
            "seed": self.seed,
            "train": [ids[i] for i in self.train],
            "validation": [ids[i] for i in self.validation],
            "test": [ids[i] for i in self.test],
        }

    def write_manifest(self, path) -> None:
        Path(path).write_text(json.dumps(self.manifest(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def read_manifest(cls, path, records: Sequence[Record]) -> "SplitSpec":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        position = {r.id: i for i, r in enumerate(records)}
        try:
            parts = [[position[i] for i in data[name]] for name in ("train", "validation", "test")]
        except KeyError as err:
            raise CorpusError(f"manifest {path} names unknown record id {err}") from None
        split = cls(*parts, seed=int(data.get("seed", 0)))
        split.ids = [r.id for r in records]
        return split

    def fingerprint(self) -> str:
        """Hash of partition membership; the seed is left out so runs with different seeds compare."""
        import hashlib

        membership = {k: v for k, v in self.manifest().items() if k != "seed"}
        return hashlib.sha256(json.dumps(membership, sort_keys=True).encode()).hexdigest()[:16]


def label_histogram(records: Sequence[Record]) -> dict:
    counts = Counter(r.label.text for r in records)
    return {label.text: counts.get(label.text, 0) for label in LabelSix}
