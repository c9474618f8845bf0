"""Tokenisation, pretrained embedding tables and fixed-length encoding."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

STOP_WORDS_VERSION = "1"

# Pinned English stop-word list (version 1). Changing it changes every
# downstream vocabulary hit, so bump STOP_WORDS_VERSION when editing.
STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are aren't as at
    be because been before being below between both but by
    can can't cannot could couldn't
    did didn't do does doesn't doing don't down during
    each few for from further
    had hadn't has hasn't have haven't having he he'd he'll he's her here
    here's hers herself him himself his how how's
    i i'd i'll i'm i've if in into is isn't it it's its itself
    let's me more most mustn't my myself
    no nor not of off on once only or other ought our ours ourselves out
    over own
    same shan't she she'd she'll she's should shouldn't so some such
    than that that's the their theirs them themselves then there there's
    these they they'd they'll they're they've this those through to too
    under until up very
    was wasn't we we'd we'll we're we've were weren't what what's when
    when's where where's which while who who's whom why why's with won't
    would wouldn't
    you you'd you'll you're you've your yours yourself yourselves
    """.split()
)

_PUNCT = string.punctuation + "‘’“”—–…"


def tokenize(s: str) -> list[str]:
    """Lowercase, split on whitespace, trim edge punctuation, drop stop words.

    Interior characters survive, so ``covid-19`` and ``don't`` stay whole.
    """
    tokens = []
    for raw in s.lower().split():
        token = raw.strip(_PUNCT)
        if token and token not in STOP_WORDS:
            tokens.append(token)
    return tokens


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vocab: dict
    vectors: np.ndarray
    _tokens: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.vectors.shape != (len(self.vocab) + 1, self.dim):
            raise EmbeddingError(
                f"vectors shape {self.vectors.shape} does not match vocab {len(self.vocab)} x dim {self.dim}"
            )
        if np.any(self.vectors[0] != 0):
            raise EmbeddingError("row 0 must be the zero padding vector")
        self.vectors.setflags(write=False)
        tokens = [""] * (len(self.vocab) + 1)
        for tok, i in self.vocab.items():
            tokens[i] = tok
        object.__setattr__(self, "_tokens", tokens)

    @classmethod
    def from_dict(cls, mapping: dict, dim: int | None = None) -> "EmbeddingTable":
        items = list(mapping.items())
        if dim is None:
            dim = len(items[0][1]) if items else 0
        vectors = np.zeros((len(items) + 1, dim))
        vocab = {}
        for i, (tok, vec) in enumerate(items, start=1):
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise EmbeddingError(f"vector for {tok!r} has {vec.size} components, expected {dim}")
            vocab[tok] = i
            vectors[i] = vec
        return cls(dim, vocab, vectors)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def lookup(self, token: str) -> int | None:
        return self.vocab.get(token)

    def token(self, index: int) -> str:
        if not 1 <= index <= len(self.vocab):
            raise IndexError(index)
        return self._tokens[index]

    def restrict(self, tokens: Iterable[str]) -> "EmbeddingTable":
        """Sub-table holding only ``tokens`` that are present; keeps memory small."""
        keep = {t: self.vectors[self.vocab[t]] for t in dict.fromkeys(tokens) if t in self.vocab}
        return EmbeddingTable.from_dict(keep, self.dim)


def load_embeddings(path, dim: int = 100, vocabulary: set | None = None) -> EmbeddingTable:
    """Read a GloVe-style text file (``token v1 ... v_dim`` per line).

    With ``vocabulary`` given, only those tokens are kept; every line is
    still validated.
    """
    vocab = {}
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\r\n").split(" ")
            if parts == [""]:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingError(f"{path}: line {lineno}: expected {dim} values, found {len(values)}")
            if token in vocab:
                raise EmbeddingError(f"{path}: line {lineno}: duplicate token {token!r}")
            if vocabulary is not None and token not in vocabulary:
                vocab[token] = -1
                continue
            try:
                rows.append(np.array(values, dtype=np.float64))
            except ValueError:
                raise EmbeddingError(f"{path}: line {lineno}: non-numeric component") from None
            vocab[token] = len(rows)
    vocab = {t: i for t, i in vocab.items() if i > 0}
    vectors = np.zeros((len(rows) + 1, dim))
    if rows:
        vectors[1:] = np.vstack(rows)
    return EmbeddingTable(dim, vocab, vectors)


@dataclass(frozen=True)
class EncodedSequence:
    indices: np.ndarray
    true_length: int


def encode(tokens: Sequence[str], table: EmbeddingTable, max_len: int) -> EncodedSequence:
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    hits = [i for i in (table.lookup(t) for t in tokens) if i is not None][:max_len]
    indices = np.zeros(max_len, dtype=np.int64)
    indices[: len(hits)] = hits
    return EncodedSequence(indices, len(hits))


def decode(seq: EncodedSequence, table: EmbeddingTable) -> list[str]:
    return [table.token(int(i)) for i in seq.indices[: seq.true_length]]


def encode_batch(texts: Sequence[Sequence[str]], table: EmbeddingTable, max_len: int):
    """Encode many token lists; returns (indices (n, max_len), lengths (n,))."""
    idx = np.zeros((len(texts), max_len), dtype=np.int64)
    lengths = np.zeros(len(texts), dtype=np.int64)
    for row, tokens in enumerate(texts):
        seq = encode(tokens, table, max_len)
        idx[row] = seq.indices
        lengths[row] = seq.true_length
    return idx, lengths


def in_vocab_length(tokens: Sequence[str], table: EmbeddingTable) -> int:
    return sum(1 for t in tokens if t in table.vocab)


def average_length(lengths: Sequence[int]) -> int:
    """Rounded mean of post-OOV token counts, at least 1.

    Takes the per-document lengths; see :func:`in_vocab_length`.
    """
    if len(lengths) == 0:
        raise ValueError("average_length of an empty corpus")
    # round half away from zero; Python's round() would send 2.5 to 2
    mean = float(np.mean(lengths))
    return max(1, int(np.floor(mean + 0.5)))


def mean_vector(tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    idx = [i for i in (table.lookup(t) for t in tokens) if i is not None]
    if not idx:
        return np.zeros(table.dim)
    return table.vectors[idx].mean(axis=0)
