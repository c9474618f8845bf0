"""Array-valued reverse-mode autodiff.

Every op returns a new :class:`Tensor` that remembers its parents and a
closure propagating the output gradient back to them. ``backward`` walks the
recorded graph in reverse topological order. Values are float64.
"""

from __future__ import annotations

import numpy as np


class GradientError(RuntimeError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None, _parents=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self.name = name
        self._parents = _parents
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self, grad=None):
        backward(self, grad)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        return power(self, exponent)


def parameter(data, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents, fn) -> Tensor:
    out = Tensor(data, _parents=tuple(parents))
    if out.requires_grad:
        out._backward = fn
    else:
        out._parents = ()
    return out


def backward(loss: Tensor, grad=None) -> None:
    """Accumulate d loss / d leaf into ``.grad`` of every leaf requiring grad."""
    if not loss.requires_grad:
        raise GradientError("loss does not depend on any trainable parameter")
    if loss._backward is None and loss._parents == ():
        raise GradientError("no forward computation recorded for this tensor")
    if grad is None:
        if loss.data.size != 1:
            raise GradientError("backward() without an explicit gradient needs a scalar loss")
        grad = np.ones_like(loss.data)

    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    grads = {id(loss): np.asarray(grad, dtype=np.float64)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node._accumulate(g)
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            if id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + pg
            else:
                grads[id(parent)] = pg


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _node(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return _node(-a.data, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _node(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def power(a: Tensor, exponent: float) -> Tensor:
    return _node(a.data**exponent, (a,), lambda g: (g * exponent * a.data ** (exponent - 1),))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return _node(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def total(a: Tensor) -> Tensor:
    return _node(a.data.sum(), (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))


def mean(a: Tensor) -> Tensor:
    n = a.data.size
    return _node(a.data.mean(), (a,), lambda g: (np.full(a.shape, g / n),))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _node(a.data * mask, (a,), lambda g: (g * mask,))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _node(y, (a,), lambda g: (g * (1.0 - y * y),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid(a.data)
    return _node(y, (a,), lambda g: (g * y * (1.0 - y),))


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(a: Tensor) -> Tensor:
    y = _softmax(a.data)

    def fn(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _node(y, (a,), fn)


def activate(x: Tensor, activation: str) -> Tensor:
    if activation == "relu":
        return relu(x)
    if activation == "tanh":
        return tanh(x)
    if activation == "sigmoid":
        return sigmoid(x)
    if activation == "softmax":
        return softmax(x)
    if activation in ("none", None):
        return x
    raise ValueError(f"unknown activation {activation!r}")


def concat(xs, axis: int = -1) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    if not xs:
        raise ValueError("concat of nothing")
    lead = xs[0].shape[:-1]
    for x in xs:
        if x.shape[:-1] != lead:
            raise ValueError(f"concat shape mismatch: {[x.shape for x in xs]}")
    sizes = [x.shape[-1] for x in xs]
    cuts = np.cumsum(sizes)[:-1]

    def fn(g):
        return tuple(np.split(g, cuts, axis=-1))

    return _node(np.concatenate([x.data for x in xs], axis=-1), xs, fn)


def add_broadcast(x: Tensor, s) -> Tensor:
    """Add a scalar (or one scalar per row, shape (n, 1)) to every element."""
    x, s = as_tensor(x), as_tensor(s)
    if s.data.size == 1:
        return _node(x.data + s.data.reshape(()), (x, s), lambda g: (g, np.full(s.shape, g.sum())))
    if s.data.ndim != 2 or s.shape[1] != 1 or s.shape[0] != x.shape[0]:
        raise ValueError(f"add_broadcast needs a scalar or ({x.shape[0]}, 1) column, got {s.shape}")
    return _node(x.data + s.data, (x, s), lambda g: (g, g.sum(axis=-1, keepdims=True)))


def gather_rows(table: Tensor, idx: np.ndarray) -> Tensor:
    """``table[idx]`` for an integer index array of any shape."""
    idx = np.asarray(idx, dtype=np.int64)

    def fn(g):
        out = np.zeros_like(table.data)
        np.add.at(out, idx.reshape(-1), g.reshape(-1, table.shape[1]))
        return (out,)

    return _node(table.data[idx], (table,), fn)


def bag_mean(table: Tensor, idx: np.ndarray, mask: np.ndarray) -> Tensor:
    """Masked mean of embedding rows per example; idx and mask are (n, m)."""
    idx = np.asarray(idx, dtype=np.int64)
    weights = np.asarray(mask, dtype=np.float64)
    counts = np.maximum(weights.sum(axis=1, keepdims=True), 1.0)
    weights = weights / counts
    out = np.einsum("nm,nmd->nd", weights, table.data[idx])

    def fn(g):
        grad = np.zeros_like(table.data)
        contrib = weights[:, :, None] * g[:, None, :]
        np.add.at(grad, idx.reshape(-1), contrib.reshape(-1, table.shape[1]))
        return (grad,)

    return _node(out, (table,), fn)


def dropout(x: Tensor, rate: float, mode: str, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity in eval mode or at rate 0."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "eval" or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return _node(x.data * keep, (x,), lambda g: (g * keep,))


EPS = 1e-7


def cross_entropy(probs: Tensor, target, kind: str) -> Tensor:
    """Mean negative log-likelihood of ``target`` under clamped probabilities.

    ``binary``: probs is (n,) or (n, 1) holding P(class 1).
    ``categorical``: probs is (n, c) (or (c,)) with rows summing to 1.
    """
    target = np.atleast_1d(np.asarray(target, dtype=np.int64))
    p = probs.data
    if kind == "binary":
        flat = p.reshape(-1)
        if flat.shape[0] != target.shape[0]:
            raise ValueError("binary cross_entropy: one probability per target required")
        if np.any((target < 0) | (target > 1)):
            raise ValueError(f"binary target out of range: {target}")
        clipped = np.clip(flat, EPS, 1.0 - EPS)
        picked = np.where(target == 1, clipped, 1.0 - clipped)
        inside = (flat > EPS) & (flat < 1.0 - EPS)
        n = len(target)

        def fn(g):
            sign = np.where(target == 1, -1.0, 1.0)
            return ((g * sign * inside / picked / n).reshape(p.shape),)

        return _node(-np.log(picked).mean(), (probs,), fn)
    if kind == "categorical":
        rows = np.atleast_2d(p)
        if rows.shape[0] != target.shape[0]:
            raise ValueError("categorical cross_entropy: one row per target required")
        if np.any((target < 0) | (target >= rows.shape[1])):
            raise ValueError(f"target index out of range for {rows.shape[1]} classes: {target}")
        ar = np.arange(len(target))
        raw = rows[ar, target]
        clipped = np.clip(raw, EPS, 1.0 - EPS)
        inside = (raw > EPS) & (raw < 1.0 - EPS)
        n = len(target)

        def fn(g):
            grad = np.zeros_like(rows)
            grad[ar, target] = -g * inside / clipped / n
            return (grad.reshape(p.shape),)

        return _node(-np.log(clipped).mean(), (probs,), fn)
    raise ValueError(f"unknown cross-entropy kind {kind!r}")
