from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(params: dict, grads: dict, state: AdamState, lr: float = 0.001,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """One bias-corrected Adam update, in place on the arrays in ``params``.

    ``params`` and ``grads`` map names to numpy arrays. Names missing from
    ``grads`` are skipped for this step.
    """
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if g.shape != p.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, parameter {p.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return state


class Adam:
    def __init__(self, params: dict, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        # name -> Tensor
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state = AdamState()

    def step(self) -> None:
        arrays = {n: t.data for n, t in self.params.items()}
        grads = {n: t.grad for n, t in self.params.items() if t.grad is not None}
        adam_step(arrays, grads, self.state, self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None


@dataclass(frozen=True)
class StopDecision:
    stop: bool
    best_epoch: int  # 1-based; 0 when history is empty


def early_stopping(history, patience: int) -> StopDecision:
    """Stop once ``patience`` consecutive epochs fail to beat the best loss.

    Only strict improvements count.
    """
    if patience < 1:
        raise ValueError("patience must be >= 1")
    best = np.inf
    best_epoch = 0
    for epoch, loss in enumerate(history, start=1):
        if loss < best:
            best, best_epoch = loss, epoch
        elif epoch - best_epoch >= patience:
            return StopDecision(True, best_epoch)
    return StopDecision(False, best_epoch)
