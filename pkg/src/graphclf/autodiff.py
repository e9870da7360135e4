"""A small dense-matrix autodiff engine with an explicit tape.

Every tensor is a 2-D float64 array. Operations executed while a :class:`Tape`
is active, with at least one input that requires a gradient, append a record
``(output, inputs, pullback)``. ``tape.backward(loss)`` replays the records in
reverse and leaves ``d loss / d leaf`` in ``leaf.grad``.

    >>> w = Tensor(np.ones((2, 1)), requires_grad=True)
    >>> with Tape() as tape:
    ...     loss = sum_all(matmul(Tensor([[1.0, 2.0]]), w))
    >>> tape.backward(loss)
    >>> w.grad.ravel().tolist()
    [1.0, 2.0]
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp


class NumericError(FloatingPointError):
    pass


CHECK_FINITE = False


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        a = np.asarray(data, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        elif a.ndim == 1:
            a = a.reshape(1, -1)
        elif a.ndim != 2:
            raise ValueError(f"tensors are 2-D, got shape {a.shape}")
        self.data = a
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError("item() needs a scalar tensor")
        return float(self.data[0, 0])

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def Parameter(data, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


@dataclass
class _Record:
    out: Tensor
    inputs: tuple[Tensor, ...]
    pullback: Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class Tape:
    records: list[_Record] = field(default_factory=list)

    def __enter__(self):
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.remove(self)
        return False

    def __len__(self):
        return len(self.records)

    def backward(self, loss: Tensor) -> None:
        """Populate ``.grad`` on every leaf that requires grad, then clear the tape."""
        if loss.shape != (1, 1):
            raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
        produced = set()
        leaves: dict[int, Tensor] = {}
        for rec in reversed(self.records):
            produced.add(id(rec.out))
            g = grads.pop(id(rec.out), None)
            if g is None:
                continue
            for t, gi in zip(rec.inputs, rec.pullback(g)):
                if gi is None or not t.requires_grad:
                    continue
                if id(t) in grads:
                    grads[id(t)] = grads[id(t)] + gi
                else:
                    grads[id(t)] = gi
                leaves[id(t)] = t
        for key, t in leaves.items():
            if key not in produced and key in grads:
                t.grad = grads[key]
        self.records.clear()


_ACTIVE: list[Tape] = []


def _record(out_data: np.ndarray, inputs: Sequence[Tensor], pullback) -> Tensor:
    if CHECK_FINITE and not np.all(np.isfinite(out_data)):
        raise NumericError("non-finite value produced")
    out = Tensor(out_data)
    if _ACTIVE and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        _ACTIVE[-1].records.append(_Record(out, tuple(inputs), pullback))
    return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[0] != 1:
        g = g.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        g = g.sum(axis=1, keepdims=True)
    return g


def _scatter_sum(idx: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """out[i] = sum of values[j] with idx[j] == i, for 1-D or 2-D values."""
    if values.ndim == 1:
        return np.bincount(idx, weights=values, minlength=n)
    ind = sp.csr_matrix((np.ones(len(idx)), (idx, np.arange(len(idx)))), shape=(n, len(idx)))
    return np.asarray(ind @ values)


def _segment_reduce_max(x: np.ndarray, seg: np.ndarray, n: int) -> np.ndarray:
    """Per-segment maxima of the rows of x (1-D or 2-D); empty segments give -inf."""
    order = np.argsort(seg, kind="stable") if np.any(np.diff(seg) < 0) else None
    xs, ss = (x, seg) if order is None else (x[order], seg[order])
    out = np.full((n,) + x.shape[1:], -np.inf)
    if len(ss):
        starts = np.flatnonzero(np.concatenate([[True], ss[1:] != ss[:-1]]))
        out[ss[starts]] = np.maximum.reduceat(xs, starts, axis=0)
    return out


# ---------------------------------------------------------------- linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")
    return _record(a.data @ b.data, (a, b),
                   lambda g: (g @ b.data.T, a.data.T @ g))


def spmm(adj: sp.spmatrix, x: Tensor) -> Tensor:
    """Sparse (constant) matrix times dense tensor."""
    x = _as_tensor(x)
    if adj.shape[1] != x.shape[0]:
        raise ValueError(f"spmm shape mismatch {adj.shape} @ {x.shape}")
    return _record(np.asarray(adj @ x.data), (x,), lambda g: (np.asarray(adj.T @ g),))


def add(a, b) -> Tensor:
    """Elementwise sum; a (1, c) or (r, 1) operand broadcasts."""
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise ValueError(f"add shape mismatch {a.shape} + {b.shape}") from None
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return _record(a.data - b.data, (a, b),
                   lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)))


def scale(a: Tensor, c: float) -> Tensor:
    return _record(a.data * c, (a,), lambda g: (g * c,))


def mul(a, b) -> Tensor:
    """Elementwise product with the same broadcasting as :func:`add`."""
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise ValueError(f"mul shape mismatch {a.shape} * {b.shape}") from None
    return _record(out, (a, b), lambda g: (_unbroadcast(g * b.data, a.shape),
                                          _unbroadcast(g * a.data, b.shape)))


elementwise_mul = mul


def concat_cols(ts: Sequence[Tensor]) -> Tensor:
    ts = [_as_tensor(t) for t in ts]
    rows = {t.shape[0] for t in ts}
    if len(rows) != 1:
        raise ValueError(f"concat_cols row mismatch {[t.shape for t in ts]}")
    bounds = np.cumsum([0] + [t.shape[1] for t in ts])
    return _record(np.hstack([t.data for t in ts]), ts,
                   lambda g: [g[:, bounds[i]:bounds[i + 1]] for i in range(len(ts))])


def sum_all(a: Tensor) -> Tensor:
    return _record(np.array([[a.data.sum()]]), (a,), lambda g: (np.full(a.shape, g[0, 0]),))


def gather_rows(a: Tensor, idx) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)

    return _record(a.data[idx], (a,), lambda g: (_scatter_sum(idx, g, a.shape[0]),))


# ---------------------------------------------------------------- segments

def _check_segments(a: Tensor, seg: np.ndarray):
    if len(seg) != a.shape[0]:
        raise ValueError(f"segment map of length {len(seg)} for {a.shape[0]} rows")


def rowsum_segments(a: Tensor, seg, nseg: int) -> Tensor:
    """Sum the rows of ``a`` sharing a segment id; returns (nseg, cols)."""
    seg = np.asarray(seg, dtype=np.int64)
    _check_segments(a, seg)
    return _record(_scatter_sum(seg, a.data, nseg), (a,), lambda g: (g[seg],))


def segment_mean(a: Tensor, seg, nseg: int) -> Tensor:
    seg = np.asarray(seg, dtype=np.int64)
    _check_segments(a, seg)
    counts = np.maximum(np.bincount(seg, minlength=nseg), 1).astype(np.float64)[:, None]
    out = _scatter_sum(seg, a.data, nseg)
    return _record(out / counts, (a,), lambda g: ((g / counts)[seg],))


def segment_max(a: Tensor, seg, nseg: int) -> Tensor:
    """Per-segment column maxima; the gradient goes to the first maximal row."""
    seg = np.asarray(seg, dtype=np.int64)
    _check_segments(a, seg)
    out = _segment_reduce_max(a.data, seg, nseg)
    out[np.isinf(out)] = 0.0
    rows = np.arange(a.shape[0])
    winner = np.full((nseg, a.shape[1]), a.shape[0], dtype=np.int64)
    hit = a.data == out[seg]
    for c in range(a.shape[1]):
        r = rows[hit[:, c]]
        segs, first = np.unique(seg[r], return_index=True)
        winner[segs, c] = r[first]

    def pullback(g):
        gi = np.zeros(a.shape)
        for c in range(a.shape[1]):
            ok = winner[:, c] < a.shape[0]
            gi[winner[ok, c], c] = g[ok, c]
        return (gi,)
    return _record(out, (a,), pullback)


def segment_softmax(a: Tensor, seg, nseg: int) -> Tensor:
    """Softmax of a single column within each segment."""
    seg = np.asarray(seg, dtype=np.int64)
    _check_segments(a, seg)
    if a.shape[1] != 1:
        raise ValueError("segment_softmax expects one column")
    x = a.data[:, 0]
    mx = _segment_reduce_max(x, seg, nseg)
    e = np.exp(x - mx[seg])
    den = np.bincount(seg, weights=e, minlength=nseg)
    p = (e / den[seg])[:, None]

    def pullback(g):
        s = np.bincount(seg, weights=(g * p)[:, 0], minlength=nseg)
        return (p * (g - s[seg][:, None]),)
    return _record(p, (a,), pullback)


# ---------------------------------------------------------------- nonlinearities

def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _record(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    mask = a.data > 0
    factor = np.where(mask, 1.0, slope)
    return _record(a.data * factor, (a,), lambda g: (g * factor,))


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    return _record(t, (a,), lambda g: (g * (1.0 - t * t),))


def log_softmax_rows(a: Tensor) -> Tensor:
    z = a.data - a.data.max(axis=1, keepdims=True)
    out = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    p = np.exp(out)
    return _record(out, (a,), lambda g: (g - p * g.sum(axis=1, keepdims=True),))


def nll(logp: Tensor, labels) -> Tensor:
    """Mean of -logp[i, labels[i]]."""
    labels = np.asarray(labels, dtype=np.int64)
    n, c = logp.shape
    if len(labels) != n:
        raise ValueError("one label per row expected")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise ValueError(f"label out of range [0, {c})")
    rows = np.arange(n)
    val = -logp.data[rows, labels].sum() / n

    def pullback(g):
        out = np.zeros(logp.shape)
        out[rows, labels] = -g[0, 0] / n
        return (out,)
    return _record(np.array([[val]]), (logp,), pullback)


# ---------------------------------------------------------------- regularisation

@dataclass
class BatchNormState:
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5

    @classmethod
    def create(cls, dim: int) -> "BatchNormState":
        return cls(np.zeros((1, dim)), np.ones((1, dim)))


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor, state: BatchNormState,
               train: bool) -> Tensor:
    """Normalise each column over the rows (the batch dimension)."""
    if x.shape[1] != state.running_mean.shape[1]:
        raise ValueError(f"batch_norm width {x.shape[1]} vs state {state.running_mean.shape[1]}")
    if not train:
        inv = 1.0 / np.sqrt(state.running_var + state.eps)
        xhat = (x.data - state.running_mean) * inv
        return _record(xhat * gamma.data + beta.data, (x, gamma, beta),
                       lambda g: (g * gamma.data * inv, (g * xhat).sum(0, keepdims=True),
                                  g.sum(0, keepdims=True)))
    n = x.shape[0]
    mu = x.data.mean(axis=0, keepdims=True)
    var = x.data.var(axis=0, keepdims=True)
    inv = 1.0 / np.sqrt(var + state.eps)
    xhat = (x.data - mu) * inv
    m = state.momentum
    unbiased = var * n / (n - 1) if n > 1 else var
    state.running_mean = (1 - m) * state.running_mean + m * mu
    state.running_var = (1 - m) * state.running_var + m * unbiased

    def pullback(g):
        dxhat = g * gamma.data
        dx = inv / n * (n * dxhat - dxhat.sum(0, keepdims=True)
                        - xhat * (dxhat * xhat).sum(0, keepdims=True))
        return dx, (g * xhat).sum(0, keepdims=True), g.sum(0, keepdims=True)
    return _record(xhat * gamma.data + beta.data, (x, gamma, beta), pullback)


def dropout(x: Tensor, p: float, train: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: kept entries are scaled by 1/(1-p); identity in eval mode."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout p={p} outside [0, 1)")
    if not train or p == 0.0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return _record(x.data * mask, (x,), lambda g: (g * mask,))


# ---------------------------------------------------------------- selection

def topk_indices(values, m: int) -> np.ndarray:
    """Indices of the m largest values, largest first; ties go to the lower index."""
    v = np.asarray(values, dtype=np.float64).ravel()
    order = np.lexsort((np.arange(len(v)), -v))
    return order[:m]


def segment_topk(values, seg, nseg: int, ratio: float) -> np.ndarray:
    """Per segment keep ceil(ratio * size) top values; returns sorted row indices."""
    v = np.asarray(values, dtype=np.float64).ravel()
    seg = np.asarray(seg, dtype=np.int64)
    sizes = np.bincount(seg, minlength=nseg)
    keep = np.ceil(ratio * sizes - 1e-9).astype(np.int64)
    order = np.lexsort((np.arange(len(v)), -v, seg))
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    rank = np.empty(len(v), dtype=np.int64)
    rank[order] = np.arange(len(v)) - starts[seg[order]]
    return np.flatnonzero(rank < keep[seg])


# ---------------------------------------------------------------- optimiser

@dataclass
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(state: AdamState, params: Sequence[Tensor], grads=None) -> None:
    """One Adam update in place. Weight decay is added to the gradient (L2 style)."""
    if grads is None:
        grads = [p.grad for p in params]
    if not state.m:
        state.m = [np.zeros(p.shape) for p in params]
        state.v = [np.zeros(p.shape) for p in params]
    if len(state.m) != len(params) or len(grads) != len(params):
        raise ValueError("parameter list does not match optimiser state")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g is None:
            g = np.zeros(p.shape)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if state.weight_decay:
            g = g + state.weight_decay * p.data
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        p.data -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


# ---------------------------------------------------------------- checking

def numerical_grad(f: Callable[[], float], x: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of the scalar f() with respect to x.data."""
    out = np.zeros(x.shape)
    flat = x.data.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        up = f()
        flat[i] = old - h
        down = f()
        flat[i] = old
        out.reshape(-1)[i] = (up - down) / (2 * h)
    return out


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12))
