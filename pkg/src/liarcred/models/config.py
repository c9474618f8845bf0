from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

REGRESSION_KINDS = ("linreg", "logreg-ovr", "ordinal-logreg")
NETWORK_KINDS = ("seq", "seq-just", "enhanced", "siamese-shared")
KINDS = REGRESSION_KINDS + NETWORK_KINDS
LABEL_SPACES = ("binary", "six")

# justification dropout differs between the plain and the enhanced model
_J_DROPOUT = {"seq-just": 0.2, "siamese-shared": 0.2, "enhanced": 0.21}


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    kind: str = "enhanced"
    label_space: str = "binary"
    s_units: int = 32
    m_units: int = 64
    j_units: int = 32
    c_units: int = 1
    lstm_hidden: int = 128
    s_dropout: float = 0.15
    j_dropout: float | None = None
    # 0 means "average in-vocabulary length of the training corpus"
    max_len_s: int = 0
    max_len_j: int = 0
    shared_encoder: bool | None = None
    meta_embed_dim: int = 16
    trainable_embeddings: bool = False
    l2: float = 1.0

    def __post_init__(self):
        if self.j_dropout is None and self.kind in _J_DROPOUT:
            self.j_dropout = _J_DROPOUT[self.kind]
        if self.shared_encoder is None:
            self.shared_encoder = self.kind == "siamese-shared"
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.label_space not in LABEL_SPACES:
            raise ConfigError(f"unknown label space {self.label_space!r}")
        if self.c_units != 1:
            raise ConfigError("the credit-score branch is a single unit")
        for name in ("s_units", "m_units", "j_units", "lstm_hidden", "meta_embed_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.max_len_s < 0 or self.max_len_j < 0:
            raise ConfigError("max_len must be >= 0")
        for name in ("s_dropout", "j_dropout"):
            rate = getattr(self, name)
            if rate is not None and not 0.0 <= rate < 1.0:
                raise ConfigError(f"{name} must be in [0, 1)")
        if self.shared_encoder and not self.has_justification:
            raise ConfigError("shared_encoder needs a justification branch")
        if self.shared_encoder and self.j_units != self.s_units:
            raise ConfigError("shared_encoder needs j_units == s_units")

    @property
    def is_regression(self) -> bool:
        return self.kind in REGRESSION_KINDS

    @property
    def has_justification(self) -> bool:
        return self.kind in ("seq-just", "enhanced", "siamese-shared")

    @property
    def has_credit(self) -> bool:
        return self.kind == "enhanced"

    @property
    def n_classes(self) -> int:
        return 2 if self.label_space == "binary" else 6

    @property
    def fusion_width(self) -> int:
        return self.s_units + self.m_units + (self.j_units if self.has_justification else 0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ModelConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
