"""Dense, LSTM and embedding layers on top of the tensor tape."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, _node, _sigmoid, activate, as_tensor, gather_rows, matmul, add, parameter


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, name: str = "dense"):
        self.n_in, self.n_out = n_in, n_out
        self.weight = parameter(glorot_uniform(rng, n_in, n_out, (n_in, n_out)), f"{name}.weight")
        self.bias = parameter(np.zeros(n_out), f"{name}.bias")

    def parameters(self) -> dict:
        return {self.weight.name: self.weight, self.bias.name: self.bias}

    def __call__(self, x, activation: str = "none") -> Tensor:
        return dense_forward(x, self.weight, self.bias, activation)


def dense_forward(x, weight: Tensor, bias: Tensor, activation: str = "none") -> Tensor:
    x = as_tensor(x)
    if x.data.ndim == 1:
        x = Tensor(x.data[None, :]) if not x.requires_grad else _node(x.data[None, :], (x,), lambda g: (g[0],))
    if x.shape[-1] != weight.shape[0]:
        raise ValueError(f"dense input width {x.shape[-1]} does not match weight rows {weight.shape[0]}")
    return activate(add(matmul(x, weight), bias), activation)


class LSTM:
    """Single-layer LSTM; gate order (input, forget, candidate, output)."""

    def __init__(self, n_in: int, hidden: int, rng: np.random.Generator, name: str = "lstm"):
        self.n_in, self.hidden = n_in, hidden
        h4 = 4 * hidden
        self.w_input = parameter(glorot_uniform(rng, n_in, h4, (n_in, h4)), f"{name}.w_input")
        self.w_recurrent = parameter(glorot_uniform(rng, hidden, h4, (hidden, h4)), f"{name}.w_recurrent")
        bias = np.zeros(h4)
        bias[hidden : 2 * hidden] = 1.0
        self.bias = parameter(bias, f"{name}.bias")

    def parameters(self) -> dict:
        return {p.name: p for p in (self.w_input, self.w_recurrent, self.bias)}

    def __call__(self, x, lengths) -> Tensor:
        return lstm_forward(x, lengths, self.w_input, self.w_recurrent, self.bias)


def lstm_forward(x, lengths, w_input: Tensor, w_recurrent: Tensor, bias: Tensor) -> Tensor:
    """Final hidden state of each sequence in a padded batch.

    ``x`` is (batch, steps, d); ``lengths`` gives each row's true length.
    Steps at or beyond a row's length leave its state untouched, so the
    result equals running the cell over the unpadded sequence alone.
    """
    x = as_tensor(x)
    lengths = np.asarray(lengths, dtype=np.int64)
    n, steps, d = x.shape
    h = w_recurrent.shape[0]
    if d != w_input.shape[0]:
        raise ValueError(f"LSTM input width {d} does not match w_input rows {w_input.shape[0]}")
    Wx, Wh, b = w_input.data, w_recurrent.data, bias.data
    hs = np.zeros((n, h))
    cs = np.zeros((n, h))
    tape = []
    for t in range(min(steps, int(lengths.max(initial=0)))):
        live = (t < lengths)[:, None].astype(np.float64)
        xt = x.data[:, t, :]
        z = xt @ Wx + hs @ Wh + b
        i = _sigmoid(z[:, :h])
        f = _sigmoid(z[:, h : 2 * h])
        g = np.tanh(z[:, 2 * h : 3 * h])
        o = _sigmoid(z[:, 3 * h :])
        c_new = f * cs + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        tape.append((xt, hs, cs, i, f, g, o, tc, live))
        cs = live * c_new + (1.0 - live) * cs
        hs = live * h_new + (1.0 - live) * hs

    def fn(grad_h):
        dWx = np.zeros_like(Wx)
        dWh = np.zeros_like(Wh)
        db = np.zeros_like(b)
        dx = np.zeros_like(x.data) if x.requires_grad else None
        dh = grad_h.copy()
        dc = np.zeros_like(dh)
        for t in range(len(tape) - 1, -1, -1):
            xt, h_prev, c_prev, i, f, g, o, tc, live = tape[t]
            dh_new = live * dh
            dc_new = live * dc + dh_new * o * (1.0 - tc * tc)
            do = dh_new * tc
            dz = np.concatenate(
                [
                    dc_new * g * i * (1.0 - i),
                    dc_new * c_prev * f * (1.0 - f),
                    dc_new * i * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dWx += xt.T @ dz
            dWh += h_prev.T @ dz
            db += dz.sum(axis=0)
            if dx is not None:
                dx[:, t, :] = dz @ Wx.T
            dh = dz @ Wh.T + (1.0 - live) * dh
            dc = dc_new * f + (1.0 - live) * dc
        return dx, dWx, dWh, db

    return _node(hs, (x, w_input, w_recurrent, bias), fn)


class Embedding:
    def __init__(self, matrix: np.ndarray, trainable: bool = False, name: str = "embedding"):
        self.trainable = trainable
        self.matrix = Tensor(np.array(matrix, dtype=np.float64), requires_grad=trainable, name=f"{name}.matrix")

    def parameters(self) -> dict:
        return {self.matrix.name: self.matrix} if self.trainable else {}

    def __call__(self, idx) -> Tensor:
        return gather_rows(self.matrix, idx)
