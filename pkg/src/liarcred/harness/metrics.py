"""Confusion matrices and classification metrics.

Binary convention: class 1 is fake news and is the positive class.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

SIX_NAMES = ("pants-fire", "false", "barely-true", "half-true", "mostly-true", "true")


class MetricsError(ValueError):
    pass


def _ratio(num: float, den: float) -> float:
    return float(num) / float(den) if den > 0 else 0.0


def f1_score(precision: float, recall: float) -> float:
    return 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # counts[true][pred]

    @classmethod
    def from_predictions(cls, y_true, y_pred, n_classes: int) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise MetricsError("y_true and y_pred differ in length")
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return cls(counts)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> int:
        return int(self.counts[1, 1])

    @property
    def tn(self) -> int:
        return int(self.counts[0, 0])

    @property
    def fp(self) -> int:
        return int(self.counts[0, 1])

    @property
    def fn(self) -> int:
        return int(self.counts[1, 0])

    def collapse(self) -> "ConfusionMatrix":
        """Six-way -> binary: pants-fire/false/barely-true become fake (1)."""
        if self.n_classes != 6:
            raise MetricsError("collapse needs a six-way matrix")
        fake = np.array([1, 1, 1, 0, 0, 0])
        out = np.zeros((2, 2), dtype=np.int64)
        np.add.at(out, (fake[:, None].repeat(6, 1), fake[None, :].repeat(6, 0)), self.counts)
        return ConfusionMatrix(out)


def binary_metrics(cm: ConfusionMatrix) -> dict:
    tp, tn, fp, fn = cm.tp, cm.tn, cm.fp, cm.fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return {
        "accuracy": _ratio(tp + tn, tp + tn + fp + fn),
        "precision": precision,
        "recall": recall,
        "f1": f1_score(precision, recall),
    }


def metrics(cm: ConfusionMatrix) -> dict:
    """Accuracy/precision/recall/F1; six-way adds per-class and macro averages."""
    if cm.total <= 0:
        raise MetricsError("empty confusion matrix")
    if cm.n_classes == 2:
        return binary_metrics(cm)
    c = cm.counts
    per_class = []
    for k in range(cm.n_classes):
        tp = c[k, k]
        fp = c[:, k].sum() - tp
        fn = c[k, :].sum() - tp
        p, r = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
        per_class.append({"precision": p, "recall": r, "f1": f1_score(p, r)})
    macro = {m: float(np.mean([pc[m] for pc in per_class])) for m in ("precision", "recall", "f1")}
    return {
        "accuracy": _ratio(np.trace(c), c.sum()),
        "precision": macro["precision"],
        "recall": macro["recall"],
        "f1": macro["f1"],
        "per_class": per_class,
        "macro": macro,
    }


@dataclass
class MetricsReport:
    label_space: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: list
    per_class: list = field(default_factory=list)
    macro: dict = field(default_factory=dict)
    train_accuracy: float | None = None
    loss_history: dict = field(default_factory=dict)
    config_hash: str = ""
    seed: int = 0
    split_manifest: str = ""
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix, label_space: str, **extra) -> "MetricsReport":
        m = metrics(cm)
        return cls(
            label_space=label_space,
            accuracy=m["accuracy"],
            precision=m["precision"],
            recall=m["recall"],
            f1=m["f1"],
            confusion=cm.counts.tolist(),
            per_class=m.get("per_class", []),
            macro=m.get("macro", {}),
            **extra,
        )

    @property
    def confusion_matrix(self) -> ConfusionMatrix:
        return ConfusionMatrix(np.array(self.confusion, dtype=np.int64))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(**data)


CV_METRICS = ("accuracy", "precision", "recall", "f1", "train_accuracy")


@dataclass
class CVReport:
    folds: list  # MetricsReport per fold
    mean: dict = field(default_factory=dict)
    variance: dict = field(default_factory=dict)
    variance_kind: str = "population"
    config_hash: str = ""
    seed: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mean:
            self.aggregate()

    def aggregate(self) -> None:
        for name in CV_METRICS:
            values = [getattr(f, name) for f in self.folds]
            if any(v is None for v in values) or not values:
                continue
            arr = np.array(values, dtype=np.float64)
            self.mean[name] = float(arr.mean())
            self.variance[name] = float(arr.var(ddof=0))

    def to_dict(self) -> dict:
        return {
            "folds": [f.to_dict() for f in self.folds],
            "mean": self.mean,
            "variance": self.variance,
            "variance_kind": self.variance_kind,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CVReport":
        data = dict(data)
        data["folds"] = [MetricsReport.from_dict(f) for f in data["folds"]]
        return cls(**data)
