"""Differentiation engine: reverse-mode tape over numpy values.

A loss evaluation is recorded as a sequence of primitive operations on
``Var`` nodes (values are numpy arrays carrying a batch dimension, or
scalars).  A single reverse sweep over the recording then yields exact
gradients with respect to every parameter leaf.

Input derivatives of a network (``u_t``, spatial gradients, Laplacians)
are obtained separately by propagating second-order jets whose components
are themselves ``Var`` nodes, so a loss may freely mix network values and
input-derivatives; the reverse sweep differentiates through both
(reverse-over-forward).

The generic helpers (:func:`exp`, :func:`vmean`, :func:`einsum2`, ...)
accept plain numpy inputs as well and then simply compute, without
recording, so the same evaluation code serves training and inference.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import splines
from .errors import NonFiniteLossError, UnsupportedOperationError
from .jets import Jet2

__all__ = [
    "Jet2",
    "Tape",
    "Var",
    "value_of",
    "is_var",
    "exp",
    "sqrt",
    "erf",
    "clip",
    "where_mask",
    "vsum",
    "vmean",
    "einsum2",
    "stack_cols",
    "reshape",
    "unsqueeze_last",
    "take_last",
    "basis_op",
    "directional_jet",
    "parameter_gradient",
]

_ACTIVE: "Tape | None" = None

_SQRT2_PI = 2.0 / math.sqrt(math.pi)


class Var:
    """One recorded value; ``parents`` and ``grad_fns`` define the pullback."""

    __slots__ = ("value", "parents", "grad_fns", "name", "tid")

    # make numpy defer binary ops to Var's reflected operators
    __array_ufunc__ = None
    __array_priority__ = 1000

    def __init__(self, value, parents, grad_fns, name, tid):
        self.value = value
        self.parents = parents
        self.grad_fns = grad_fns
        self.name = name
        self.tid = tid

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        return f"Var({self.name}#{self.tid}, shape={self.shape})"

    def __add__(self, other):
        return _add(self, other)

    def __radd__(self, other):
        return _add(self, other)

    def __sub__(self, other):
        return _sub(self, other)

    def __rsub__(self, other):
        return _sub(other, self)

    def __neg__(self):
        return _record(-self.value, (self,), (lambda adj: -adj,), "neg")

    def __mul__(self, other):
        return _mul(self, other)

    def __rmul__(self, other):
        return _mul(self, other)

    def __truediv__(self, other):
        return _div(self, other)

    def __rtruediv__(self, other):
        return _div(other, self)

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise UnsupportedOperationError(f"unsupported power exponent {p!r}")
        v = self.value

        def back(adj, v=v, p=p):
            return adj * (p * v ** (p - 1))

        return _record(v**p, (self,), (back,), "pow")


class Tape:
    """Ordered record of one loss evaluation; context manager activates it."""

    def __init__(self):
        self.nodes: list[Var] = []
        self._prev = None

    def __enter__(self):
        global _ACTIVE
        self._prev = _ACTIVE
        _ACTIVE = self
        return self

    def __exit__(self, *exc):
        global _ACTIVE
        _ACTIVE = self._prev
        self._prev = None
        return False

    def leaf(self, value, name="leaf") -> Var:
        var = Var(np.asarray(value, dtype=float), (), (), name, len(self.nodes))
        self.nodes.append(var)
        return var

    def gradient(self, loss: Var, leaves: Sequence[Var]) -> list[np.ndarray]:
        """Reverse sweep: d(loss)/d(leaf) for every leaf, in leaf order."""
        if not isinstance(loss, Var):
            raise UnsupportedOperationError("loss was not recorded on this tape")
        if np.size(loss.value) != 1:
            raise UnsupportedOperationError("loss must be scalar")
        want = {leaf.tid for leaf in leaves}
        found: dict[int, np.ndarray] = {}
        adj: dict[int, object] = {loss.tid: np.float64(1.0)}
        for var in reversed(self.nodes[: loss.tid + 1]):
            a = adj.pop(var.tid, None)
            if a is None:
                continue
            if var.tid in want:
                found[var.tid] = np.asarray(a) + np.zeros(var.shape)
            for parent, fn in zip(var.parents, var.grad_fns):
                g = fn(a)
                prev = adj.get(parent.tid)
                adj[parent.tid] = g if prev is None else prev + g
        return [found.get(leaf.tid, np.zeros(leaf.shape)) for leaf in leaves]

    def first_nonfinite(self) -> str | None:
        for var in self.nodes:
            if not np.all(np.isfinite(var.value)):
                return f"{var.name}#{var.tid}"
        return None


def _record(value, parents, grad_fns, name) -> Var:
    if _ACTIVE is None:
        raise UnsupportedOperationError(
            "variable arithmetic outside an active Tape context"
        )
    var = Var(value, parents, grad_fns, name, len(_ACTIVE.nodes))
    _ACTIVE.nodes.append(var)
    return var


def is_var(x) -> bool:
    return isinstance(x, Var)


def value_of(x):
    return x.value if isinstance(x, Var) else x


def _unbroadcast(grad, shape):
    if shape == ():
        return np.sum(grad)
    grad = np.asarray(grad)
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _add(a, b):
    va, vb = value_of(a), value_of(b)
    parents, fns = [], []
    if is_var(a):
        sa = np.shape(va)
        parents.append(a)
        fns.append(lambda adj, sa=sa: _unbroadcast(adj, sa))
    if is_var(b):
        sb = np.shape(vb)
        parents.append(b)
        fns.append(lambda adj, sb=sb: _unbroadcast(adj, sb))
    return _record(va + vb, tuple(parents), tuple(fns), "add")


def _sub(a, b):
    va, vb = value_of(a), value_of(b)
    parents, fns = [], []
    if is_var(a):
        sa = np.shape(va)
        parents.append(a)
        fns.append(lambda adj, sa=sa: _unbroadcast(adj, sa))
    if is_var(b):
        sb = np.shape(vb)
        parents.append(b)
        fns.append(lambda adj, sb=sb: _unbroadcast(-adj, sb))
    return _record(va - vb, tuple(parents), tuple(fns), "sub")


def _mul(a, b):
    va, vb = value_of(a), value_of(b)
    parents, fns = [], []
    if is_var(a):
        sa = np.shape(va)
        parents.append(a)
        fns.append(lambda adj, vb=vb, sa=sa: _unbroadcast(adj * vb, sa))
    if is_var(b):
        sb = np.shape(vb)
        parents.append(b)
        fns.append(lambda adj, va=va, sb=sb: _unbroadcast(adj * va, sb))
    return _record(va * vb, tuple(parents), tuple(fns), "mul")


def _div(a, b):
    va, vb = value_of(a), value_of(b)
    parents, fns = [], []
    if is_var(a):
        sa = np.shape(va)
        parents.append(a)
        fns.append(lambda adj, vb=vb, sa=sa: _unbroadcast(adj / vb, sa))
    if is_var(b):
        sb = np.shape(vb)
        parents.append(b)
        fns.append(lambda adj, va=va, vb=vb, sb=sb: _unbroadcast(-adj * va / (vb * vb), sb))
    return _record(va / vb, tuple(parents), tuple(fns), "div")


def exp(x):
    if not is_var(x):
        return np.exp(x)
    val = np.exp(x.value)
    return _record(val, (x,), (lambda adj, val=val: adj * val,), "exp")


def sqrt(x):
    if not is_var(x):
        return np.sqrt(x)
    val = np.sqrt(x.value)

    def back(adj, val=val):
        # subgradient 0 at exactly zero
        return np.where(val > 0.0, adj * (0.5 / np.where(val > 0.0, val, 1.0)), 0.0)

    return _record(val, (x,), (back,), "sqrt")


def erf(x):
    if not is_var(x):
        return np.vectorize(math.erf)(x) if np.ndim(x) else math.erf(x)
    v = x.value
    val = np.vectorize(math.erf)(v) if np.ndim(v) else math.erf(v)
    return _record(val, (x,), (lambda adj, v=v: adj * _SQRT2_PI * np.exp(-v * v),), "erf")


def clip(x, lo, hi):
    if not is_var(x):
        return np.clip(x, lo, hi)
    v = x.value
    mask = (v >= lo) & (v <= hi)
    return _record(np.clip(v, lo, hi), (x,), (lambda adj, mask=mask: adj * mask,), "clip")


def where_mask(mask, a, b):
    """Select by a constant boolean mask (comparisons carry no gradient)."""
    va, vb = value_of(a), value_of(b)
    val = np.where(mask, va, vb)
    parents, fns = [], []
    if is_var(a):
        sa = np.shape(va)
        parents.append(a)
        fns.append(lambda adj, mask=mask, sa=sa: _unbroadcast(adj * mask, sa))
    if is_var(b):
        sb = np.shape(vb)
        parents.append(b)
        fns.append(lambda adj, mask=mask, sb=sb: _unbroadcast(adj * ~mask, sb))
    if not parents:
        return val
    return _record(val, tuple(parents), tuple(fns), "where")


def vsum(x, axis=None):
    if not is_var(x):
        return np.sum(x, axis=axis)
    shape = x.shape

    def back(adj, shape=shape, axis=axis):
        if axis is None:
            return np.broadcast_to(adj, shape)
        return np.broadcast_to(np.expand_dims(adj, axis), shape)

    return _record(np.sum(x.value, axis=axis), (x,), (back,), "sum")


def vmean(x, axis=None):
    if not is_var(x):
        return np.mean(x, axis=axis)
    shape = x.shape
    count = np.size(x.value) if axis is None else shape[axis]

    def back(adj, shape=shape, axis=axis, count=count):
        if axis is None:
            return np.broadcast_to(adj / count, shape)
        return np.broadcast_to(np.expand_dims(adj / count, axis), shape)

    return _record(np.mean(x.value, axis=axis), (x,), (back,), "mean")


def einsum2(spec, a, b):
    """Two-operand einsum; backward swaps the operand and output subscripts."""
    va, vb = value_of(a), value_of(b)
    if not (is_var(a) or is_var(b)):
        return np.einsum(spec, va, vb, optimize=True)
    lhs, out = spec.split("->")
    s1, s2 = lhs.split(",")
    val = np.einsum(spec, va, vb, optimize=True)
    parents, fns = [], []
    if is_var(a):
        parents.append(a)
        fns.append(
            lambda adj, vb=vb: np.einsum(f"{out},{s2}->{s1}", adj, vb, optimize=True)
        )
    if is_var(b):
        parents.append(b)
        fns.append(
            lambda adj, va=va: np.einsum(f"{s1},{out}->{s2}", va, adj, optimize=True)
        )
    return _record(val, tuple(parents), tuple(fns), "einsum")


def stack_cols(cols):
    """Stack equally-shaped components along a new last axis."""
    vals = [value_of(c) for c in cols]
    if not any(is_var(c) for c in cols):
        return np.stack(vals, axis=-1)
    val = np.stack(vals, axis=-1)
    parents, fns = [], []
    for j, c in enumerate(cols):
        if is_var(c):
            parents.append(c)
            fns.append(lambda adj, j=j: adj[..., j])
    return _record(val, tuple(parents), tuple(fns), "stack")


def reshape(x, shape):
    if not is_var(x):
        return np.reshape(x, shape)
    orig = x.shape
    return _record(
        np.reshape(x.value, shape),
        (x,),
        (lambda adj, orig=orig: np.reshape(adj, orig),),
        "reshape",
    )


def unsqueeze_last(x):
    if not is_var(x):
        return np.asarray(x)[..., None]
    return reshape(x, x.shape + (1,))


def take_last(x, j):
    """Select index ``j`` of the last axis."""
    if not is_var(x):
        return np.asarray(x)[..., j]
    shape = x.shape

    def back(adj, shape=shape, j=j):
        z = np.zeros(shape)
        z[..., j] = adj
        return z

    return _record(x.value[..., j], (x,), (back,), "take")


def basis_op(grid, x, order=2):
    """Spline-basis primitive: values plus ``order`` derivative tensors.

    For recorded inputs the next-higher derivative closes over each output's
    pullback, so losses built from basis derivatives stay differentiable.
    """
    if not is_var(x):
        return tuple(splines.basis_arrays(grid, x, order=order))
    arrays = splines.basis_arrays(grid, x.value, order=order + 1)
    outs = []
    for d in range(order + 1):
        nxt = arrays[d + 1]
        outs.append(
            _record(
                arrays[d],
                (x,),
                (lambda adj, nxt=nxt: np.sum(adj * nxt, axis=-1),),
                f"basis{d}",
            )
        )
    return tuple(outs)


def directional_jet(f, inputs, direction_index: int) -> Jet2:
    """Exact (value, d/dx_i, d2/dx_i2) of a scalar jet-traced function."""
    inputs = list(inputs)
    if not 0 <= direction_index < len(inputs):
        raise IndexError(f"direction {direction_index} outside {len(inputs)} inputs")
    jets = [
        Jet2(float(v), 1.0 if i == direction_index else 0.0, 0.0)
        for i, v in enumerate(inputs)
    ]
    try:
        out = f(jets)
    except TypeError as e:
        raise UnsupportedOperationError(f"unsupported operation inside jet trace: {e}") from e
    if not isinstance(out, Jet2):
        out = Jet2(out, 0.0, 0.0)
    return out


def parameter_gradient(loss: Var, leaves: Sequence[Var], tape: Tape | None = None) -> list[np.ndarray]:
    """Gradient of a recorded scalar loss with respect to parameter leaves."""
    tape = tape if tape is not None else _ACTIVE
    if tape is None:
        raise UnsupportedOperationError("no tape available for the reverse sweep")
    if not np.all(np.isfinite(value_of(loss))):
        raise NonFiniteLossError(
            "loss is non-finite", detail=tape.first_nonfinite()
        )
    return tape.gradient(loss, leaves)
