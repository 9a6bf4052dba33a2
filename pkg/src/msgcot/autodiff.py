"""Reverse-mode automatic differentiation over numpy arrays.

A :class:`Tensor` wraps an ndarray and records, per operation, a backward
closure plus references to its parents. Calling :meth:`Tensor.backward` on a
scalar loss walks the recorded graph in reverse topological order and
accumulates gradients into every tensor created with ``requires_grad=True``.

The op set is deliberately small: matmul, sparse-constant matmul, elementwise
arithmetic with broadcasting, ELU / sigmoid / exp / log / softplus, row
softmax and row logsumexp, row gathering and slicing, segment means,
row L2-normalization, reductions and row concatenation. Every gradient is
validated against central finite differences (see :func:`grad_check`), which
is the contract this module has to honor; the closures are just one way to
meet it.

Operations on inputs that do not require gradients build no graph, so
inference-only code pays almost nothing for going through the same functions.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse as _sparse
from scipy.special import expit as _expit

from .errors import ShapeError

__all__ = [
    "Tensor",
    "as_tensor",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "spmm",
    "transpose",
    "elu",
    "sigmoid",
    "exp",
    "log",
    "power",
    "softplus",
    "softmax_rows",
    "logsumexp_rows",
    "tsum",
    "tmean",
    "gather_rows",
    "slice_rows",
    "slice_cols",
    "clamp_min",
    "segment_mean",
    "normalize_rows",
    "concat_rows",
    "cosine_matrix",
    "cosine_rowwise",
    "grad_check",
]


class Tensor:
    """An ndarray plus the bookkeeping needed for reverse-mode gradients."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return self.data.item()

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # arithmetic sugar; every dunder defers to the module-level ops
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)

    def backward(self):
        """Backpropagate from a scalar: fills ``grad`` on every grad-requiring
        tensor reachable through the recorded graph."""
        if self.data.size != 1:
            raise ShapeError(f"backward() needs a scalar, got shape {self.data.shape}")
        order = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward()
                # free the closure so intermediate buffers can be released
                node._backward = None
                node._parents = ()


def _toposort(root):
    order, visited = [], set()
    stack = [(root, iter(root._parents))]
    visited.add(id(root))
    while stack:
        node, it = stack[-1]
        advanced = False
        for parent in it:
            if id(parent) not in visited:
                visited.add(id(parent))
                stack.append((parent, iter(parent._parents)))
                advanced = True
                break
        if not advanced:
            order.append(node)
            stack.pop()
    return order


def as_tensor(x):
    """Wrap ``x`` as a constant Tensor (no-op when already a Tensor)."""
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward):
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _accumulate(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        # copy: g may alias another tensor's gradient or be a broadcast view
        t.grad = np.array(g, dtype=t.data.dtype)
    else:
        t.grad += g


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _pair(a, b):
    """Wrap both operands; a bare python scalar adopts the tensor's dtype so
    float32 pipelines stay float32."""
    if isinstance(a, Tensor) and not isinstance(b, Tensor) and np.ndim(b) == 0:
        b = Tensor(np.asarray(b, dtype=a.data.dtype))
    elif isinstance(b, Tensor) and not isinstance(a, Tensor) and np.ndim(a) == 0:
        a = Tensor(np.asarray(a, dtype=b.data.dtype))
    return as_tensor(a), as_tensor(b)


def add(a, b):
    a, b = _pair(a, b)
    out_data = a.data + b.data

    def backward():
        _accumulate(a, _unbroadcast(out.grad, a.data.shape))
        _accumulate(b, _unbroadcast(out.grad, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def sub(a, b):
    a, b = _pair(a, b)
    out_data = a.data - b.data

    def backward():
        _accumulate(a, _unbroadcast(out.grad, a.data.shape))
        _accumulate(b, _unbroadcast(-out.grad, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def mul(a, b):
    a, b = _pair(a, b)
    out_data = a.data * b.data

    def backward():
        _accumulate(a, _unbroadcast(out.grad * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(out.grad * a.data, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def div(a, b):
    a, b = _pair(a, b)
    out_data = a.data / b.data

    def backward():
        _accumulate(a, _unbroadcast(out.grad / b.data, a.data.shape))
        _accumulate(b, _unbroadcast(-out.grad * out_data / b.data, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def neg(a):
    a = as_tensor(a)

    def backward():
        _accumulate(a, -out.grad)

    out = _make(-a.data, (a,), backward)
    return out


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}")
    out_data = a.data @ b.data

    def backward():
        _accumulate(a, out.grad @ b.data.T)
        _accumulate(b, a.data.T @ out.grad)

    out = _make(out_data, (a, b), backward)
    return out


def spmm(s, x):
    """Constant sparse matrix times dense tensor. ``s`` is never differentiated."""
    x = as_tensor(x)
    if not _sparse.issparse(s):
        raise ShapeError("spmm expects a scipy sparse matrix on the left")
    if s.shape[1] != x.data.shape[0]:
        raise ShapeError(f"spmm shape mismatch: {s.shape} @ {x.data.shape}")
    out_data = s @ x.data

    def backward():
        _accumulate(x, s.T @ out.grad)

    out = _make(out_data, (x,), backward)
    return out


def transpose(a):
    a = as_tensor(a)

    def backward():
        _accumulate(a, out.grad.T)

    out = _make(a.data.T, (a,), backward)
    return out


def elu(a):
    a = as_tensor(a)
    out_data = np.where(a.data > 0, a.data, np.expm1(a.data))

    def backward():
        _accumulate(a, out.grad * np.where(a.data > 0, 1.0, out_data + 1.0))

    out = _make(out_data, (a,), backward)
    return out


def sigmoid(a):
    a = as_tensor(a)
    out_data = _expit(a.data)

    def backward():
        _accumulate(a, out.grad * out_data * (1.0 - out_data))

    out = _make(out_data, (a,), backward)
    return out


def exp(a):
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward():
        _accumulate(a, out.grad * out_data)

    out = _make(out_data, (a,), backward)
    return out


def log(a):
    a = as_tensor(a)

    def backward():
        _accumulate(a, out.grad / a.data)

    out = _make(np.log(a.data), (a,), backward)
    return out


def power(a, p):
    """Elementwise ``a ** p`` for a fixed real exponent p >= 1."""
    a = as_tensor(a)
    out_data = a.data**p

    def backward():
        _accumulate(a, out.grad * p * a.data ** (p - 1))

    out = _make(out_data, (a,), backward)
    return out


def softplus(a):
    a = as_tensor(a)
    out_data = np.logaddexp(0.0, a.data).astype(a.data.dtype, copy=False)

    def backward():
        _accumulate(a, out.grad * _expit(a.data))

    out = _make(out_data, (a,), backward)
    return out


def softmax_rows(a):
    """Row-wise softmax with max-subtraction for stability."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError("softmax_rows expects a 2-D tensor")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=1, keepdims=True)

    def backward():
        g = out.grad
        dot = (g * out_data).sum(axis=1, keepdims=True)
        _accumulate(a, out_data * (g - dot))

    out = _make(out_data, (a,), backward)
    return out


def logsumexp_rows(a):
    """Row-wise log-sum-exp, returning a 1-D tensor."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError("logsumexp_rows expects a 2-D tensor")
    m = a.data.max(axis=1, keepdims=True)
    e = np.exp(a.data - m)
    s = e.sum(axis=1, keepdims=True)
    out_data = (m + np.log(s)).ravel()

    def backward():
        _accumulate(a, out.grad[:, None] * (e / s))

    out = _make(out_data, (a,), backward)
    return out


def tsum(a, axis=None):
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis)

    def backward():
        g = out.grad
        if axis is not None:
            g = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(g, a.data.shape))

    out = _make(out_data, (a,), backward)
    return out


def tmean(a, axis=None):
    a = as_tensor(a)
    out_data = a.data.mean(axis=axis)
    count = a.data.size if axis is None else a.data.shape[axis]

    def backward():
        g = out.grad
        if axis is not None:
            g = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(g, a.data.shape) / count)

    out = _make(out_data, (a,), backward)
    return out


def gather_rows(a, idx):
    """Select rows ``a[idx]``; duplicate indices accumulate in the backward pass."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.intp)
    out_data = a.data[idx]

    def backward():
        g = np.zeros_like(a.data)
        np.add.at(g, idx, out.grad)
        _accumulate(a, g)

    out = _make(out_data, (a,), backward)
    return out


def slice_rows(a, start, stop):
    """View of rows ``a[start:stop]``; gradients land back in place."""
    a = as_tensor(a)
    if not 0 <= start < stop <= a.data.shape[0]:
        raise ShapeError(f"bad row range [{start}, {stop}) for shape {a.data.shape}")
    out_data = a.data[start:stop]

    def backward():
        # adds straight into the parent's gradient region: many slices of one
        # large tensor must not each allocate a full-size buffer
        if not a.requires_grad:
            return
        if a.grad is None:
            a.grad = np.zeros_like(a.data)
        a.grad[start:stop] += out.grad

    out = _make(out_data, (a,), backward)
    return out


def clamp_min(a, floor):
    """Elementwise ``max(a, floor)``; zero gradient where clamped."""
    a = as_tensor(a)
    out_data = np.maximum(a.data, floor)

    def backward():
        _accumulate(a, out.grad * (a.data > floor))

    out = _make(out_data, (a,), backward)
    return out


def slice_cols(a, num):
    """Keep the first ``num`` columns of a 2-D tensor."""
    a = as_tensor(a)
    if a.data.ndim != 2 or not 1 <= num <= a.data.shape[1]:
        raise ShapeError(f"cannot take {num} columns from shape {a.data.shape}")
    out_data = a.data[:, :num]

    def backward():
        g = np.zeros_like(a.data)
        g[:, :num] = out.grad
        _accumulate(a, g)

    out = _make(out_data, (a,), backward)
    return out


def segment_mean(a, segments, num_segments):
    """Mean of rows grouped by ``segments``; every segment must be non-empty."""
    a = as_tensor(a)
    segments = np.asarray(segments, dtype=np.intp)
    if segments.shape[0] != a.data.shape[0]:
        raise ShapeError("segment ids must cover every row")
    counts = np.bincount(segments, minlength=num_segments)
    if (counts == 0).any():
        empty = int(np.flatnonzero(counts == 0)[0])
        raise ShapeError(f"segment {empty} has no members")
    sums = np.zeros((num_segments, a.data.shape[1]), dtype=a.data.dtype)
    np.add.at(sums, segments, a.data)
    out_data = sums / counts[:, None].astype(a.data.dtype)

    def backward():
        _accumulate(a, out.grad[segments] / counts[segments, None].astype(a.data.dtype))

    out = _make(out_data, (a,), backward)
    return out


def normalize_rows(a):
    """L2-normalize each row; all-zero rows stay zero (and get zero gradient)."""
    a = as_tensor(a)
    norms = np.linalg.norm(a.data, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    out_data = a.data / safe

    def backward():
        g = out.grad
        inner = (g * a.data).sum(axis=1, keepdims=True)
        grad = g / safe - a.data * inner / safe**3
        grad = np.where(norms > 0, grad, 0.0)
        _accumulate(a, grad)

    out = _make(out_data, (a,), backward)
    return out


def concat_rows(parts):
    """Stack 2-D tensors along axis 0."""
    parts = [as_tensor(p) for p in parts]
    out_data = np.concatenate([p.data for p in parts], axis=0)

    def backward():
        offset = 0
        for p in parts:
            n = p.data.shape[0]
            _accumulate(p, out.grad[offset : offset + n])
            offset += n

    out = _make(out_data, tuple(parts), backward)
    return out


def cosine_matrix(a, b):
    """Pairwise cosine similarities between rows of ``a`` and rows of ``b``.

    Zero-norm rows behave as if orthogonal to everything (similarity 0).
    """
    return matmul(normalize_rows(a), transpose(normalize_rows(b)))


def cosine_rowwise(a, b):
    """Cosine similarity of corresponding rows; zero-norm rows give 0."""
    return tsum(mul(normalize_rows(a), normalize_rows(b)), axis=1)


def grad_check(loss_fn, params, eps=1e-5, max_entries=25, seed=0):
    """Max relative error between backward-pass and central-difference gradients.

    ``loss_fn`` maps a list of Tensors to a scalar Tensor and must be pure.
    ``params`` is a list of float64 ndarrays; up to ``max_entries`` entries of
    each are probed. The error per entry is
    ``|analytic - numeric| / max(1e-8, |numeric|)``.
    """
    leaves = [Tensor(np.array(p, dtype=np.float64), requires_grad=True) for p in params]
    loss = loss_fn(leaves)
    loss.backward()
    analytic = [
        leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
        for leaf in leaves
    ]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for k, leaf in enumerate(leaves):
        flat = leaf.data.ravel()
        n = flat.size
        picks = np.arange(n) if n <= max_entries else rng.choice(n, max_entries, replace=False)
        for j in picks:
            base = [np.array(l.data, dtype=np.float64) for l in leaves]
            base[k].ravel()[j] += eps
            hi = loss_fn([Tensor(b) for b in base]).item()
            base[k].ravel()[j] -= 2 * eps
            lo = loss_fn([Tensor(b) for b in base]).item()
            numeric = (hi - lo) / (2 * eps)
            err = abs(analytic[k].ravel()[j] - numeric) / max(1e-8, abs(numeric))
            worst = max(worst, err)
    return worst
