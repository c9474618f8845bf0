"""Minimal differentiable core: tensors, layers, losses, Adam, early stopping."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, numeric_gradient, relative_error
from .layers import LSTM, Dense, Embedding, dense_forward, glorot_uniform, lstm_forward
from .optim import Adam, AdamState, StopDecision, adam_step, early_stopping
from .tensor import (
    GradientError,
    Tensor,
    activate,
    add,
    add_broadcast,
    backward,
    bag_mean,
    concat,
    cross_entropy,
    dropout,
    gather_rows,
    matmul,
    mean,
    mul,
    parameter,
    relu,
    sigmoid,
    softmax,
    tanh,
    total,
)

__all__ = [
    "Adam",
    "AdamState",
    "Dense",
    "Embedding",
    "GradientError",
    "LSTM",
    "StopDecision",
    "Tensor",
    "activate",
    "adam_step",
    "add",
    "add_broadcast",
    "backward",
    "bag_mean",
    "check_gradients",
    "concat",
    "cross_entropy",
    "dense_forward",
    "dropout",
    "early_stopping",
    "gather_rows",
    "glorot_uniform",
    "load_checkpoint",
    "lstm_forward",
    "matmul",
    "mean",
    "mul",
    "numeric_gradient",
    "parameter",
    "relative_error",
    "relu",
    "save_checkpoint",
    "sigmoid",
    "softmax",
    "tanh",
    "total",
]
