"""Dense double-precision linear algebra with explicit forward/backward pairs.

A ``Tensor2D`` is a 2-D, C-contiguous ``float64`` numpy array (``rows`` x
``cols``, row major).  Every forward operation here has a hand-written
``*_backward`` companion that maps the gradient of the output onto the
gradients of the inputs; higher-level modules compose these by hand instead
of relying on a tape.  ``finite_diff_check`` is the central-difference
verifier used throughout the test suite.

All math is double precision so that finite-difference tolerances are
achievable and runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShapeError, ValidationError, VerificationError

Tensor2D = np.ndarray

# Sigmoid outputs are clipped into the open interval (0, 1).
_SIG_LO = 1e-300
_SIG_HI = 1.0 - 1e-16


def tensor2d(values) -> Tensor2D:
    """Build a validated Tensor2D. 1-D input becomes a single row."""
    arr = np.array(values, dtype=np.float64, order="C")
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"Tensor2D must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"Tensor2D must have positive dims, got {arr.shape}")
    require_finite("tensor2d", arr)
    return arr


def zeros(rows: int, cols: int) -> Tensor2D:
    if rows < 1 or cols < 1:
        raise ShapeError(f"Tensor2D must have positive dims, got ({rows}, {cols})")
    return np.zeros((rows, cols), dtype=np.float64)


def require_finite(name: str, t: Tensor2D) -> None:
    if not np.isfinite(t).all():
        raise ValidationError(f"{name}: non-finite entries present")


@dataclass
class GradSlot:
    """A parameter tensor paired with its additively accumulated gradient.

    Gradients from the primary and every auxiliary loss land in the same
    slot; ``reset_grad`` zeroes it between optimizer steps.  Not safe for
    concurrent mutation.
    """

    value: Tensor2D
    grad: Tensor2D

    @classmethod
    def of(cls, value: Tensor2D) -> "GradSlot":
        v = np.array(value, dtype=np.float64, order="C")
        if v.ndim != 2:
            raise ShapeError(f"GradSlot value must be 2-D, got ndim={v.ndim}")
        return cls(value=v, grad=np.zeros_like(v))

    def add_grad(self, g: Tensor2D) -> None:
        if g.shape != self.value.shape:
            raise ShapeError(
                f"gradient shape {g.shape} does not match value shape {self.value.shape}"
            )
        self.grad += g

    def reset_grad(self) -> None:
        self.grad[...] = 0.0


def matmul(a: Tensor2D, b: Tensor2D) -> Tensor2D:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} x {b.shape}")
    out = a @ b
    require_finite("matmul", out)
    return out


def matmul_backward(d_out: Tensor2D, a: Tensor2D, b: Tensor2D) -> tuple[Tensor2D, Tensor2D]:
    """Gradients of y = a @ b: dA = dOut @ b.T, dB = a.T @ dOut."""
    if d_out.shape != (a.shape[0], b.shape[1]):
        raise ShapeError(
            f"matmul_backward: d_out shape {d_out.shape} does not match ({a.shape[0]}, {b.shape[1]})"
        )
    return d_out @ b.T, a.T @ d_out


def add_bias(x: Tensor2D, b: Tensor2D) -> Tensor2D:
    """Add row-vector bias b (1 x cols) to every row of x."""
    if b.shape != (1, x.shape[1]):
        raise ShapeError(f"add_bias: bias shape {b.shape} does not match x cols {x.shape}")
    return x + b


def add_bias_backward(d_out: Tensor2D) -> tuple[Tensor2D, Tensor2D]:
    return d_out, d_out.sum(axis=0, keepdims=True)


def relu(x: Tensor2D) -> Tensor2D:
    return np.maximum(x, 0.0)


def relu_backward(d_out: Tensor2D, x: Tensor2D) -> Tensor2D:
    if d_out.shape != x.shape:
        raise ShapeError(f"relu_backward: shapes differ, {d_out.shape} vs {x.shape}")
    return d_out * (x > 0.0)


def sigmoid(x: Tensor2D) -> Tensor2D:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    np.clip(out, _SIG_LO, _SIG_HI, out=out)
    require_finite("sigmoid", out)
    return out


def sigmoid_backward(d_out: Tensor2D, y: Tensor2D) -> Tensor2D:
    """Backward given the forward output y = sigmoid(x)."""
    if d_out.shape != y.shape:
        raise ShapeError(f"sigmoid_backward: shapes differ, {d_out.shape} vs {y.shape}")
    return d_out * y * (1.0 - y)


def softmax_rows(x: Tensor2D) -> Tensor2D:
    if x.shape[1] < 1:
        raise ShapeError("softmax_rows: rows must be nonempty")
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)
    require_finite("softmax_rows", out)
    return out


def softmax_rows_backward(d_out: Tensor2D, y: Tensor2D) -> Tensor2D:
    """Backward given the forward output y = softmax_rows(x)."""
    if d_out.shape != y.shape:
        raise ShapeError(f"softmax_rows_backward: shapes differ, {d_out.shape} vs {y.shape}")
    inner = (d_out * y).sum(axis=1, keepdims=True)
    return y * (d_out - inner)


def finite_diff_check(
    f: Callable[[Tensor2D], float],
    x: Tensor2D,
    analytic_grad: Tensor2D,
    h: float = 1e-5,
) -> float:
    """Max relative error between central differences of f at x and analytic_grad.

    Relative error per entry is |fd - an| / max(1e-12, |fd| + |an|).
    """
    if h <= 0:
        raise ValidationError(f"finite_diff_check: h must be positive, got {h}")
    if analytic_grad.shape != x.shape:
        raise ShapeError(
            f"finite_diff_check: grad shape {analytic_grad.shape} does not match x {x.shape}"
        )
    work = np.array(x, dtype=np.float64)
    max_rel = 0.0
    it = np.nditer(work, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = work[idx]
        work[idx] = orig + h
        f_hi = float(f(work))
        work[idx] = orig - h
        f_lo = float(f(work))
        work[idx] = orig
        if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
            raise VerificationError(f"finite_diff_check: non-finite f value at index {idx}")
        fd = (f_hi - f_lo) / (2.0 * h)
        an = float(analytic_grad[idx])
        rel = abs(fd - an) / max(1e-12, abs(fd) + abs(an))
        if rel > max_rel:
            max_rel = rel
    return max_rel
