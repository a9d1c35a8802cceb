#!/usr/bin/env python3
"""
Minimal reverse-mode gradient engine.

A GradTape records primitive operations in execution order (a Wengert list). Every
node keeps its forward value; backward() walks the list in reverse and accumulates
vector-Jacobian products into one gradient slot per node. Parameters are registered
by name with watch(), and backward() returns a gradient for every one of them.

Complex quantities never reach the tape: callers concatenate real and imaginary
parts and differentiate over real parameters only.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from testbench.errors import DimensionError, TapeError

logger = logging.getLogger(__name__)


class Op:
    """A differentiable primitive.

    forward() maps input arrays to an output array. backward() receives the upstream
    gradient, the input arrays and the output, and returns one gradient per input
    (None for inputs that need no gradient).
    """

    name = "op"

    def forward(self, *inputs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray, inputs: Sequence[np.ndarray],
                 output: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError


class Var:
    """Handle to one node on a tape."""

    __slots__ = ("tape", "index")

    def __init__(self, tape: "GradTape", index: int):
        self.tape = tape
        self.index = index

    @property
    def value(self) -> np.ndarray:
        return self.tape.value_of(self)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def __add__(self, other: "Var") -> "Var":
        return self.tape.apply(Add(), self, other)

    def __mul__(self, other: "Var") -> "Var":
        return self.tape.apply(Mul(), self, other)

    def __repr__(self) -> str:
        return f"Var(index={self.index}, shape={self.shape})"


class _Record:
    __slots__ = ("op", "inputs")

    def __init__(self, op: Optional[Op], inputs: Tuple[int, ...]):
        self.op = op
        self.inputs = inputs


class GradTape:
    """Single-writer recording of one forward pass."""

    def __init__(self):
        self._values: List[np.ndarray] = []
        self._records: List[_Record] = []
        self._params: Dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._values)

    @property
    def parameters(self) -> List[str]:
        return list(self._params)

    def value_of(self, var: Var) -> np.ndarray:
        if var.tape is not self:
            raise TapeError("Variable belongs to a different tape")
        return self._values[var.index]

    def _push(self, value: np.ndarray, record: _Record) -> Var:
        self._values.append(value)
        self._records.append(record)
        return Var(self, len(self._values) - 1)

    def watch(self, name: str, array: np.ndarray) -> Var:
        """Register a trainable parameter block."""
        if name in self._params:
            raise TapeError(f"Parameter '{name}' is already on the tape")
        var = self._push(np.array(array, dtype=np.float64, copy=True), _Record(None, ()))
        self._params[name] = var.index
        return var

    def constant(self, array: np.ndarray) -> Var:
        return self._push(np.array(array, dtype=np.float64, copy=True), _Record(None, ()))

    def apply(self, op: Op, *inputs: Var) -> Var:
        for var in inputs:
            if var.tape is not self:
                raise TapeError(f"{op.name}: input recorded on a different tape")
        values = [self._values[v.index] for v in inputs]
        out = op.forward(*values)
        return self._push(out, _Record(op, tuple(v.index for v in inputs)))

    def backward(self, loss: Var) -> Dict[str, np.ndarray]:
        """Gradient of a scalar loss with respect to every watched parameter."""
        if not any(rec.op is not None for rec in self._records):
            raise TapeError("backward() called before any forward operation was recorded")
        if loss.tape is not self:
            raise TapeError("Loss was recorded on a different tape")
        loss_value = self._values[loss.index]
        if loss_value.size != 1:
            raise TapeError(f"Loss must be scalar, got shape {loss_value.shape}")

        grads: List[Optional[np.ndarray]] = [None] * (loss.index + 1)
        grads[loss.index] = np.ones_like(loss_value)
        for i in range(loss.index, -1, -1):
            g = grads[i]
            record = self._records[i]
            if g is None or record.op is None:
                continue
            inputs = [self._values[j] for j in record.inputs]
            input_grads = record.op.backward(g, inputs, self._values[i])
            for j, gj in zip(record.inputs, input_grads):
                if gj is None:
                    continue
                grads[j] = gj if grads[j] is None else grads[j] + gj

        result = {}
        for name, idx in self._params.items():
            g = grads[idx] if idx < len(grads) else None
            result[name] = np.zeros_like(self._values[idx]) if g is None else g
        return result

    def replay(self) -> np.ndarray:
        """Re-run every recorded op from the leaf values; returns the last node's value."""
        if not self._values:
            raise TapeError("Nothing recorded")
        values = list(self._values)
        for i, record in enumerate(self._records):
            if record.op is not None:
                values[i] = record.op.forward(*[values[j] for j in record.inputs])
        return values[-1]


# Dense-layer primitives

class Add(Op):
    name = "add"

    def forward(self, a, b):
        return a + b

    def backward(self, grad, inputs, output):
        a, b = inputs
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)


class Mul(Op):
    name = "mul"

    def forward(self, a, b):
        return a * b

    def backward(self, grad, inputs, output):
        a, b = inputs
        return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


class Sum(Op):
    name = "sum"

    def forward(self, a):
        return np.asarray(a.sum())

    def backward(self, grad, inputs, output):
        return (np.broadcast_to(grad, inputs[0].shape).copy(),)


class Dense(Op):
    """x @ W.T + b for a batch of row vectors (or a single vector)."""

    name = "dense"

    def forward(self, x, w, b):
        if x.shape[-1] != w.shape[1]:
            raise DimensionError(f"dense: input width {x.shape[-1]} != weight columns {w.shape[1]}")
        if b.shape != (w.shape[0],):
            raise DimensionError(f"dense: bias shape {b.shape} != ({w.shape[0]},)")
        return x @ w.T + b

    def backward(self, grad, inputs, output):
        x, w, _ = inputs
        g2 = np.atleast_2d(grad)
        x2 = np.atleast_2d(x)
        dx = (grad @ w).reshape(x.shape)
        dw = g2.T @ x2
        db = g2.sum(axis=0)
        return dx, dw, db


class Relu(Op):
    name = "relu"

    def forward(self, x):
        return np.maximum(x, 0.0)

    def backward(self, grad, inputs, output):
        return (grad * (inputs[0] > 0),)


class SquaredError(Op):
    """Sum of squared differences, optionally divided by a fixed count."""

    name = "squared_error"

    def __init__(self, divisor: float = 1.0):
        self.divisor = float(divisor)

    def forward(self, pred, target):
        if pred.shape != target.shape:
            raise DimensionError(f"squared_error: {pred.shape} vs {target.shape}")
        diff = pred - target
        return np.asarray(np.sum(diff * diff) / self.divisor)

    def backward(self, grad, inputs, output):
        pred, target = inputs
        g = 2.0 * (pred - target) * (grad / self.divisor)
        return g, -g


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def dense(x: Var, w: Var, b: Var) -> Var:
    return x.tape.apply(Dense(), x, w, b)


def relu(x: Var) -> Var:
    return x.tape.apply(Relu(), x)


def total(x: Var) -> Var:
    return x.tape.apply(Sum(), x)


def squared_error(pred: Var, target: Var, divisor: float = 1.0) -> Var:
    return pred.tape.apply(SquaredError(divisor), pred, target)


def backward(tape: GradTape, loss: Var) -> Dict[str, np.ndarray]:
    return tape.backward(loss)


def finite_diff_grad(loss_fn: Callable[[Dict[str, np.ndarray]], float],
                     params: Dict[str, np.ndarray],
                     step: float = 1e-4) -> Dict[str, np.ndarray]:
    """Central-difference gradient of a pure loss over every parameter coordinate."""
    grads = {}
    shifted = {name: np.array(value, dtype=np.float64, copy=True) for name, value in params.items()}
    for name, value in shifted.items():
        g = np.zeros_like(value)
        flat = value.reshape(-1)
        g_flat = g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            upper = float(loss_fn(shifted))
            flat[i] = original - step
            lower = float(loss_fn(shifted))
            flat[i] = original
            g_flat[i] = (upper - lower) / (2.0 * step)
        grads[name] = g
    return grads


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    """Per-coordinate |a - b| / max(|a|, |b|, floor)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
