"""Branch networks: statement (S), metadata (M), justification (J), credit (C).

    S: embed -> LSTM -> dropout -> dense(relu)
    M: per-field category embeddings (bag-mean) + standardized counts -> dense(relu)
    J: as S, with its own dropout rate (and optionally S's parameters)
    C: tanh(w * history_ratio + b)

Fusion concatenates S, M and J; the enhanced model then adds C to every
coordinate before the sigmoid/softmax head.
"""

from __future__ import annotations

import numpy as np

from ..corpus import CATEGORICAL_FIELDS
from ..engine import (
    LSTM,
    Dense,
    Embedding,
    Tensor,
    add,
    add_broadcast,
    bag_mean,
    concat,
    dropout,
    mul,
    parameter,
    tanh,
)
from ..text import EmbeddingTable
from .config import ConfigError, ModelConfig
from .features import Batch, MetadataEncoding


class Encoder:
    """Embedding lookup, LSTM, dropout, dense(relu) for one text input."""

    def __init__(self, embedding: Embedding, lstm: LSTM, dense: Dense):
        self.embedding = embedding
        self.lstm = lstm
        self.dense = dense

    def parameters(self) -> dict:
        return {**self.lstm.parameters(), **self.dense.parameters()}

    def __call__(self, idx, lengths, rate: float, mode: str, rng) -> Tensor:
        h = self.lstm(self.embedding(idx), lengths)
        h = dropout(h, rate, mode, rng)
        return self.dense(h, "relu")


class Model:
    def __init__(self, config: ModelConfig, table: EmbeddingTable, metadata: MetadataEncoding, seed: int = 0):
        if config.is_regression:
            raise ConfigError(f"{config.kind} is a regression baseline, not a network")
        if table.vectors.shape[1] != table.dim:
            raise ConfigError("embedding table dimension mismatch")
        self.config = config
        self.metadata = metadata
        rng = np.random.default_rng([seed, 0])
        self.embedding = Embedding(table.vectors, trainable=config.trainable_embeddings)
        d, h = table.dim, config.lstm_hidden

        self.s_branch = Encoder(
            self.embedding, LSTM(d, h, rng, "s.lstm"), Dense(h, config.s_units, rng, "s.dense")
        )
        self.field_embeddings = {
            name: parameter(rng.normal(0.0, 0.05, (size, config.meta_embed_dim)), f"m.embed.{name}")
            for name, size in metadata.sizes().items()
        }
        m_in = config.meta_embed_dim * len(CATEGORICAL_FIELDS) + 5
        self.m_dense = Dense(m_in, config.m_units, rng, "m.dense")

        self.j_branch = None
        if config.has_justification:
            if config.shared_encoder:
                self.j_branch = self.s_branch
            else:
                self.j_branch = Encoder(
                    self.embedding, LSTM(d, h, rng, "j.lstm"), Dense(h, config.j_units, rng, "j.dense")
                )

        self.credit_w = self.credit_b = None
        if config.has_credit:
            self.credit_w = parameter(np.array([1.0]), "c.w")
            self.credit_b = parameter(np.array([0.0]), "c.b")

        n_out = 1 if config.label_space == "binary" else 6
        self.head = Dense(config.fusion_width, n_out, rng, "head")

    def parameters(self) -> dict:
        params = {}
        params.update(self.embedding.parameters())
        params.update(self.s_branch.parameters())
        params.update({p.name: p for p in self.field_embeddings.values()})
        params.update(self.m_dense.parameters())
        if self.j_branch is not None and self.j_branch is not self.s_branch:
            params.update(self.j_branch.parameters())
        if self.credit_w is not None:
            params.update({"c.w": self.credit_w, "c.b": self.credit_b})
        params.update(self.head.parameters())
        return params

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.parameters().values())

    def branch_outputs(self, batch: Batch, mode: str = "eval", rng=None) -> dict:
        cfg = self.config
        out = {"S": self.s_branch(batch.s_idx, batch.s_len, cfg.s_dropout, mode, rng)}
        parts = [
            bag_mean(self.field_embeddings[name], *batch.meta[name]) for name in CATEGORICAL_FIELDS
        ]
        parts.append(Tensor(batch.counts))
        out["M"] = self.m_dense(concat(parts), "relu")
        if self.j_branch is not None:
            if batch.j_idx is None:
                raise ConfigError(f"{cfg.kind} model needs justification inputs")
            out["J"] = self.j_branch(batch.j_idx, batch.j_len, cfg.j_dropout, mode, rng)
        if self.credit_w is not None:
            out["C"] = tanh(add(mul(Tensor(batch.ratio), self.credit_w), self.credit_b))
        return out

    def fused(self, batch: Batch, mode: str = "eval", rng=None) -> Tensor:
        """Pre-head activation: concat(S, M[, J]) [+ C broadcast]."""
        out = self.branch_outputs(batch, mode, rng)
        fused = concat([out[k] for k in ("S", "M", "J") if k in out])
        if "C" in out:
            fused = add_broadcast(fused, out["C"])
        return fused

    def forward(self, batch: Batch, mode: str = "eval", rng=None) -> Tensor:
        """Class probabilities: (n, 1) P(fake) for binary, (n, 6) for six-way."""
        activation = "sigmoid" if self.config.label_space == "binary" else "softmax"
        return self.head(self.fused(batch, mode, rng), activation)

    def predict_proba(self, batch: Batch) -> np.ndarray:
        probs = self.forward(batch, "eval").data
        return probs[:, 0] if self.config.label_space == "binary" else probs

    def predict(self, batch: Batch, threshold: float = 0.5) -> np.ndarray:
        probs = self.predict_proba(batch)
        if self.config.label_space == "binary":
            return (probs >= threshold).astype(np.int64)
        return probs.argmax(axis=1)

    def state_dict(self) -> dict:
        return {name: p.data.copy() for name, p in self.parameters().items()}

    def load_state_dict(self, state: dict) -> None:
        params = self.parameters()
        if set(state) != set(params):
            raise ValueError(f"parameter names differ: {sorted(set(state) ^ set(params))}")
        for name, p in params.items():
            if state[name].shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: {state[name].shape} vs {p.data.shape}")
            p.data[...] = state[name]


def build(config: ModelConfig, table: EmbeddingTable, metadata: MetadataEncoding, seed: int = 0) -> Model:
    return Model(config, table, metadata, seed)
