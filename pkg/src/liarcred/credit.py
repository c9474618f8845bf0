"""Speaker Credit Score.

The score aggregates a speaker's five historical verdict counts with fixed
weights (mostly-true 0.2 up to pants-on-fire 1.0), normalises by the total,
then applies a learned scalar affine map and ``tanh``. Higher means less
credible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import CreditCounts

# Keyed by CreditCounts field name; constants, never trained.
CLASS_WEIGHTS = {"mtc": 0.2, "htc": 0.5, "btc": 0.75, "fc": 0.9, "pfc": 1.0}

# Same weights in CreditCounts.as_tuple() order (btc, fc, htc, mtc, pfc).
WEIGHT_VECTOR = np.array([0.75, 0.9, 0.5, 0.2, 1.0])


@dataclass
class CreditScoreParams:
    w: float = 1.0
    b: float = 0.0

    @property
    def class_weights(self) -> dict:
        return dict(CLASS_WEIGHTS)


def history_ratio(c: CreditCounts) -> float:
    total = c.mtc + c.htc + c.btc + c.fc + c.pfc
    if total == 0:
        return 0.0
    weighted = (
        CLASS_WEIGHTS["mtc"] * c.mtc
        + CLASS_WEIGHTS["htc"] * c.htc
        + CLASS_WEIGHTS["btc"] * c.btc
        + CLASS_WEIGHTS["fc"] * c.fc
        + CLASS_WEIGHTS["pfc"] * c.pfc
    )
    return weighted / total


def history_ratios(counts: np.ndarray) -> np.ndarray:
    """Vectorised ratio for an (n, 5) array in (btc, fc, htc, mtc, pfc) order."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=1)
    weighted = counts @ WEIGHT_VECTOR
    out = np.zeros(len(counts))
    np.divide(weighted, total, out=out, where=total > 0)
    return out


def credit_score(c: CreditCounts, p: CreditScoreParams | None = None) -> float:
    p = p or CreditScoreParams()
    return math.tanh(p.w * history_ratio(c) + p.b)


def credit_score_grad(c: CreditCounts, p: CreditScoreParams) -> tuple[float, float]:
    """Analytic (d score / d w, d score / d b)."""
    r = history_ratio(c)
    s = math.tanh(p.w * r + p.b)
    d = 1.0 - s * s
    return d * r, d
