from .experiments import (
    ExperimentError,
    Fitted,
    compare,
    cross_validate,
    evaluate,
    fit,
    train_eval,
    write_json,
    write_loss_history,
)
from .metrics import ConfusionMatrix, CVReport, MetricsError, MetricsReport, f1_score, metrics
from .training import TrainConfig, TrainResult, fit_network, default_train_config

__all__ = [
    "CVReport",
    "ConfusionMatrix",
    "ExperimentError",
    "Fitted",
    "MetricsError",
    "MetricsReport",
    "TrainConfig",
    "TrainResult",
    "compare",
    "cross_validate",
    "evaluate",
    "f1_score",
    "fit",
    "fit_network",
    "metrics",
    "default_train_config",
    "train_eval",
    "write_json",
    "write_loss_history",
]
