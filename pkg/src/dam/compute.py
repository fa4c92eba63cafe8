"""Small dense-array engine with reverse-mode differentiation.

Operations called inside an active :class:`Record` are appended to it in
execution order, so the record is always topologically sorted.  The record
can be replayed (re-running every primitive on the current leaf values) and
differentiated.  Outside a record the primitives just compute values.

    with Record() as rec:
        y = relu(matmul(x, w))
        loss = sum_squares(y)
    rec.backward()          # w.grad now holds d loss / d w
"""

from __future__ import annotations

import contextvars
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DTYPE = np.float64
CE_FLOOR = 1e-12

_active: contextvars.ContextVar["Record | None"] = contextvars.ContextVar("dam_record", default=None)


class ShapeError(ValueError):
    """Raised when a primitive receives inputs of incompatible shape."""


class RecordError(RuntimeError):
    pass


class Tensor:
    """Dense float64 array plus an optional gradient accumulator."""

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.array(data, dtype=DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


@dataclass
class Node:
    op: "Primitive"
    inputs: tuple[Tensor, ...]
    output: Tensor
    attrs: dict
    saved: object = None


@dataclass
class Primitive:
    name: str
    forward: Callable  # (*arrays, **attrs) -> (out, saved)
    backward: Callable  # (g, saved, arrays, out, **attrs) -> tuple of input grads (or None)
    # backward also receives needs=(bool per input) so it can skip constant inputs
    selective: bool = False

    def __call__(self, *inputs, **attrs) -> Tensor:
        tensors = tuple(as_tensor(t) for t in inputs)
        arrays = [t.data for t in tensors]
        out_data, saved = self.forward(*arrays, **attrs)
        out = Tensor(out_data, requires_grad=any(t.requires_grad for t in tensors))
        rec = _active.get()
        if rec is not None:
            rec.nodes.append(Node(self, tensors, out, attrs, saved))
        return out


@dataclass
class Record:
    """Ordered log of the primitives applied while the record was active."""

    nodes: list[Node] = field(default_factory=list)
    _token: object = field(default=None, repr=False)

    def __enter__(self) -> "Record":
        self._token = _active.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _active.reset(self._token)
        self._token = None

    @property
    def output(self) -> Tensor:
        if not self.nodes:
            raise RecordError("record is empty: nothing has been evaluated")
        return self.nodes[-1].output

    def leaves(self) -> list[Tensor]:
        """Tensors consumed by the record but not produced inside it, in first-use order."""
        produced = {id(n.output) for n in self.nodes}
        seen: set[int] = set()
        out = []
        for n in self.nodes:
            for t in n.inputs:
                if id(t) not in produced and id(t) not in seen:
                    seen.add(id(t))
                    out.append(t)
        return out

    def parameters(self) -> list[Tensor]:
        return [t for t in self.leaves() if t.requires_grad]

    def replay(self) -> Tensor:
        """Recompute every node from the current leaf values; returns the final tensor."""
        if not self.nodes:
            raise RecordError("record is empty: nothing to evaluate")
        for n in self.nodes:
            n.output.data, n.saved = n.op.forward(*[t.data for t in n.inputs], **n.attrs)
        return self.output

    def backward(self, seed=None, output: Tensor | None = None) -> dict[Tensor, np.ndarray]:
        """Propagate ``seed`` from ``output`` (default: last tensor) back to the leaves.

        Gradients are added into ``grad`` of every ``requires_grad`` leaf; leaves
        that are not reachable get a zero gradient.  Returns this call's
        contribution per leaf.
        """
        if not self.nodes:
            raise RecordError("backward called before any forward evaluation")
        out = self.output if output is None else output
        if seed is None:
            if out.size != 1:
                raise ShapeError(f"backward: implicit seed needs a scalar output, got shape {out.shape}")
            seed = np.ones_like(out.data)
        seed = np.asarray(seed, dtype=DTYPE)
        if seed.shape != out.shape:
            raise ShapeError(f"backward: seed shape {seed.shape} does not match output shape {out.shape}")

        grads: dict[int, np.ndarray] = {id(out): seed.copy()}
        for n in reversed(self.nodes):
            g = grads.pop(id(n.output), None)
            if g is None or not n.output.requires_grad:
                continue
            arrays = [t.data for t in n.inputs]
            if n.op.selective:
                needs = tuple(t.requires_grad for t in n.inputs)
                in_grads = n.op.backward(g, n.saved, arrays, n.output.data, needs=needs, **n.attrs)
            else:
                in_grads = n.op.backward(g, n.saved, arrays, n.output.data, **n.attrs)
            for t, gi in zip(n.inputs, in_grads):
                if gi is None or not t.requires_grad:
                    continue
                prev = grads.get(id(t))
                grads[id(t)] = gi if prev is None else prev + gi

        result = {}
        for t in self.parameters():
            g = grads.get(id(t))
            if g is None:
                g = np.zeros_like(t.data)
            t.accumulate(g)
            result[t] = g
        return result


def evaluate(record: Record) -> Tensor:
    return record.replay()


def backward(record: Record, seed=None) -> dict[Tensor, np.ndarray]:
    return record.backward(seed)


# ---------------------------------------------------------------------------
# helpers


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape`` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(name: str, a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{name}: cannot combine shapes {a.shape} and {b.shape}") from None


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# primitives


def _matmul_fwd(a, b):
    if a.ndim not in (1, 2) or b.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    return a @ b, None


def _matmul_bwd(g, _, arrays, out, needs=(True, True)):
    a, b = arrays
    a2 = a.reshape(1, -1) if a.ndim == 1 else a
    b2 = b.reshape(-1, 1) if b.ndim == 1 else b
    g2 = g.reshape(a2.shape[0], b2.shape[1])
    ga = (g2 @ b2.T).reshape(a.shape) if needs[0] else None
    gb = (a2.T @ g2).reshape(b.shape) if needs[1] else None
    return ga, gb


matmul = Primitive("matmul", _matmul_fwd, _matmul_bwd, selective=True)


def _transpose_fwd(a):
    if a.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")
    return a.T.copy(), None


transpose = Primitive("transpose", _transpose_fwd, lambda g, s, arrs, out: (g.T,))


def _add_fwd(a, b):
    _check_broadcast("add", a, b)
    return a + b, None


def _add_bwd(g, _, arrays, out):
    a, b = arrays
    return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)


add = Primitive("add", _add_fwd, _add_bwd)


def _mul_fwd(a, b):
    _check_broadcast("mul", a, b)
    return a * b, None


def _mul_bwd(g, _, arrays, out):
    a, b = arrays
    return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)


mul = Primitive("mul", _mul_fwd, _mul_bwd)

_scale = Primitive(
    "scale",
    lambda a, c: (a * c, None),
    lambda g, s, arrs, out, c: (g * c,),
)


def scale(a: Tensor, c: float) -> Tensor:
    return _scale(a, c=float(c))

tanh = Primitive(
    "tanh",
    lambda a: (np.tanh(a), None),
    lambda g, s, arrs, out: (g * (1.0 - out * out),),
)

sigmoid = Primitive(
    "sigmoid",
    lambda a: (_sigmoid(a), None),
    lambda g, s, arrs, out: (g * out * (1.0 - out),),
)

relu = Primitive(
    "relu",
    lambda a: (np.maximum(a, 0.0), None),
    lambda g, s, arrs, out: (g * (arrs[0] > 0.0),),
)


def _softmax_bwd(g, _, arrays, s):
    return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)


softmax = Primitive("softmax", lambda a: (_softmax(a), None), _softmax_bwd)
"""Softmax over the last axis (row-wise for matrices)."""


def _concat_fwd(*arrays, axis):
    try:
        return np.concatenate(arrays, axis=axis), [a.shape[axis] for a in arrays]
    except ValueError:
        shapes = ", ".join(str(a.shape) for a in arrays)
        raise ShapeError(f"concat(axis={axis}): incompatible shapes {shapes}") from None


def _concat_bwd(g, sizes, arrays, out, axis):
    return tuple(np.split(g, np.cumsum(sizes)[:-1], axis=axis))


_concat = Primitive("concat", _concat_fwd, _concat_bwd)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return _concat(*tensors, axis=axis)


def _gather_fwd(a, indices):
    idx = np.asarray(indices, dtype=np.intp)
    extent = a.shape[0]
    bad = idx[(idx < 0) | (idx >= extent)]
    if bad.size:
        raise IndexError(f"gather: index {int(bad[0])} out of range for extent {extent}")
    return a[idx], idx


def _gather_bwd(g, idx, arrays, out, indices):
    full = np.zeros_like(arrays[0])
    np.add.at(full, idx, g)
    return (full,)


_gather = Primitive("gather", _gather_fwd, _gather_bwd)


def gather(a: Tensor, indices) -> Tensor:
    """Rows ``a[indices]``; gradients scatter-add back to the selected rows."""
    return _gather(a, indices=tuple(int(i) for i in indices))


def _columns_fwd(a, start, stop):
    if not 0 <= start < stop <= a.shape[-1]:
        raise ShapeError(f"columns: range [{start}, {stop}) invalid for shape {a.shape}")
    return a[..., start:stop].copy(), None


def _columns_bwd(g, _, arrays, out, start, stop):
    full = np.zeros_like(arrays[0])
    full[..., start:stop] = g
    return (full,)


_columns = Primitive("columns", _columns_fwd, _columns_bwd)


def columns(a: Tensor, start: int, stop: int) -> Tensor:
    return _columns(a, start=start, stop=stop)


def _reshape_fwd(a, shape):
    if int(np.prod(shape)) != a.size:
        raise ShapeError(f"reshape: cannot view shape {a.shape} as {shape}")
    return a.reshape(shape).copy(), None


_reshape = Primitive("reshape", _reshape_fwd, lambda g, s, arrs, out, shape: (g.reshape(arrs[0].shape),))


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    return _reshape(a, shape=tuple(shape))


def _mean_fwd(a, axis):
    if axis >= a.ndim:
        raise ShapeError(f"mean: axis {axis} out of range for shape {a.shape}")
    return a.mean(axis=axis), None


def _mean_bwd(g, _, arrays, out, axis):
    a = arrays[0]
    return (np.broadcast_to(np.expand_dims(g, axis), a.shape) / a.shape[axis],)


_mean = Primitive("mean", _mean_fwd, _mean_bwd)


def mean(a: Tensor, axis: int = 0) -> Tensor:
    return _mean(a, axis=axis)


total = Primitive(
    "sum",
    lambda a: (np.asarray(a.sum()), None),
    lambda g, s, arrs, out: (np.full_like(arrs[0], g),),
)

sum_squares = Primitive(
    "sum_squares",
    lambda a: (np.asarray((a * a).sum()), None),
    lambda g, s, arrs, out: (2.0 * g * arrs[0],),
)


def _xent_fwd(p, y):
    if p.shape != y.shape:
        raise ShapeError(f"cross_entropy: probabilities {p.shape} vs target {y.shape}")
    clipped = np.maximum(p, CE_FLOOR)
    return np.asarray(-(y * np.log(clipped)).sum()), clipped


def _xent_bwd(g, clipped, arrays, out):
    p, y = arrays
    gp = -g * y / clipped
    gp[p < CE_FLOOR] = 0.0
    return gp, None


cross_entropy = Primitive("cross_entropy", _xent_fwd, _xent_bwd)
"""``-sum(y * log p)`` with probabilities floored at ``CE_FLOOR``."""


# ---------------------------------------------------------------------------
# gradient checking


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    checked: int
    worst: tuple[str, tuple[int, ...]] | None = None

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def grad_check(
    record: Record,
    tolerance: float = 1e-4,
    step: float = 1e-6,
    floor: float = 1e-4,
    params: Sequence[Tensor] | None = None,
    analytic: dict[Tensor, np.ndarray] | None = None,
) -> GradCheckReport:
    """Compare analytic gradients with central differences, entry by entry.

    Relative error is ``|analytic - numeric| / max(|numeric|, floor)``; the
    floor keeps entries whose true gradient is ~0 from dividing round-off by
    round-off.  ``analytic`` may be passed to check externally supplied
    gradients (the record's own backward is used otherwise).
    """
    out = record.output
    if out.size != 1:
        raise ShapeError(f"grad_check: output must be scalar, got shape {out.shape}")
    if params is None:
        params = record.parameters()
    if analytic is None:
        saved = {t: t.grad for t in params}
        for t in params:
            t.grad = None
        record.replay()
        analytic = record.backward()
        for t in params:
            t.grad = saved[t]

    worst_err, worst_at, checked = 0.0, None, 0
    for t in params:
        a_grad = analytic[t]
        flat = t.data.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            f_plus = float(record.replay().data)
            flat[k] = orig - step
            f_minus = float(record.replay().data)
            flat[k] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            err = abs(a_grad.reshape(-1)[k] - numeric) / max(abs(numeric), floor)
            checked += 1
            if err > worst_err:
                worst_err = err
                worst_at = (t.name or "?", np.unravel_index(k, t.shape))
    record.replay()
    return GradCheckReport(worst_err, tolerance, checked, worst_at)
