"""Turn records into the arrays the branch networks consume.

Everything learned from data here (imputation means, category vocabularies,
count standardisation, sequence lengths) is fitted on the training
partition only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import CATEGORICAL_FIELDS, UNKNOWN, CorpusError, Record, TrainingStats, class_index, impute_missing
from ..credit import history_ratios
from ..text import EmbeddingTable, average_length, encode_batch, in_vocab_length, tokenize
from .config import ModelConfig


def _field_values(record: Record, name: str) -> tuple:
    value = getattr(record, name)
    if name == "subject":
        return tuple(value) or (UNKNOWN,)
    return (value if value is not None else UNKNOWN,)


@dataclass
class MetadataEncoding:
    """Per-field category vocabularies (index 0 is UNKNOWN) and count scaling."""

    vocabs: dict
    count_mean: np.ndarray
    count_std: np.ndarray

    @classmethod
    def fit(cls, records) -> "MetadataEncoding":
        if not records:
            raise CorpusError("metadata encoding needs a non-empty training set")
        vocabs = {}
        for name in CATEGORICAL_FIELDS:
            vocab = {UNKNOWN: 0}
            for r in records:
                for v in _field_values(r, name):
                    vocab.setdefault(v, len(vocab))
            vocabs[name] = vocab
        counts = np.array([r.credit.as_tuple() for r in records], dtype=np.float64)
        std = counts.std(axis=0)
        std[std == 0] = 1.0
        return cls(vocabs, counts.mean(axis=0), std)

    def sizes(self) -> dict:
        return {name: len(v) for name, v in self.vocabs.items()}

    def encode_field(self, records, name: str):
        vocab = self.vocabs[name]
        values = [_field_values(r, name) for r in records]
        width = max((len(v) for v in values), default=1)
        idx = np.zeros((len(records), width), dtype=np.int64)
        mask = np.zeros((len(records), width))
        for row, vs in enumerate(values):
            for col, v in enumerate(vs):
                idx[row, col] = vocab.get(v, 0)
                mask[row, col] = 1.0
        return idx, mask

    def standardize(self, counts: np.ndarray) -> np.ndarray:
        return (counts - self.count_mean) / self.count_std

    def to_dict(self) -> dict:
        return {
            "vocabs": self.vocabs,
            "count_mean": self.count_mean.tolist(),
            "count_std": self.count_std.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetadataEncoding":
        return cls(data["vocabs"], np.array(data["count_mean"]), np.array(data["count_std"]))


@dataclass
class Batch:
    s_idx: np.ndarray
    s_len: np.ndarray
    meta: dict  # field -> (idx, mask)
    counts: np.ndarray  # standardized, (n, 5)
    ratio: np.ndarray  # credit history ratio, (n, 1)
    j_idx: np.ndarray | None = None
    j_len: np.ndarray | None = None
    y: np.ndarray | None = None
    ids: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.s_len)

    def take(self, rows) -> "Batch":
        rows = np.asarray(rows, dtype=np.int64)
        return Batch(
            s_idx=self.s_idx[rows],
            s_len=self.s_len[rows],
            meta={k: (i[rows], m[rows]) for k, (i, m) in self.meta.items()},
            counts=self.counts[rows],
            ratio=self.ratio[rows],
            j_idx=None if self.j_idx is None else self.j_idx[rows],
            j_len=None if self.j_len is None else self.j_len[rows],
            y=None if self.y is None else self.y[rows],
            ids=[self.ids[i] for i in rows] if self.ids else [],
        )


@dataclass
class FeatureEncoder:
    table: EmbeddingTable
    stats: TrainingStats
    metadata: MetadataEncoding
    max_len_s: int
    max_len_j: int

    @classmethod
    def fit(cls, train_records, table: EmbeddingTable, config: ModelConfig) -> "FeatureEncoder":
        if not train_records:
            raise CorpusError("cannot fit features on an empty training set")
        stats = TrainingStats.from_records(train_records)
        imputed = impute_missing(train_records, stats)
        max_len_s = config.max_len_s or average_length(
            [in_vocab_length(tokenize(r.statement), table) for r in imputed]
        )
        max_len_j = config.max_len_j
        if config.has_justification and not max_len_j:
            if any(r.justification is None for r in imputed):
                raise CorpusError("justification branch needs LIAR-Plus records")
            max_len_j = average_length([in_vocab_length(tokenize(r.justification), table) for r in imputed])
        return cls(table, stats, MetadataEncoding.fit(imputed), max_len_s, max_len_j)

    def transform(self, records, label_space: str | None = None, justification: bool = False) -> Batch:
        records = impute_missing(records, self.stats)
        s_idx, s_len = encode_batch([tokenize(r.statement) for r in records], self.table, self.max_len_s)
        j_idx = j_len = None
        if justification:
            missing = [r.id for r in records if r.justification is None]
            if missing:
                raise CorpusError(f"records without justification for a justification model: {missing[:5]}")
            j_idx, j_len = encode_batch([tokenize(r.justification) for r in records], self.table, self.max_len_j)
        raw_counts = np.array([r.credit.as_tuple() for r in records], dtype=np.float64).reshape(-1, 5)
        y = None
        if label_space is not None:
            y = np.array([class_index(r.label, label_space) for r in records], dtype=np.int64)
        return Batch(
            s_idx=s_idx,
            s_len=s_len,
            meta={name: self.metadata.encode_field(records, name) for name in CATEGORICAL_FIELDS},
            counts=self.metadata.standardize(raw_counts),
            ratio=history_ratios(raw_counts)[:, None],
            j_idx=j_idx,
            j_len=j_len,
            y=y,
            ids=[r.id for r in records],
        )

    def state(self) -> dict:
        return {
            "count_means": list(self.stats.count_means),
            "metadata": self.metadata.to_dict(),
            "max_len_s": self.max_len_s,
            "max_len_j": self.max_len_j,
        }

    @classmethod
    def from_state(cls, state: dict, table: EmbeddingTable) -> "FeatureEncoder":
        return cls(
            table,
            TrainingStats(tuple(state["count_means"])),
            MetadataEncoding.from_dict(state["metadata"]),
            state["max_len_s"],
            state["max_len_j"],
        )
