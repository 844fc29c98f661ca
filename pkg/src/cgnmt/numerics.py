"""Dense linear algebra primitives and the finite-difference gradient oracle.

All arithmetic is 64-bit floating point.  Vectors are 1-d float64
ndarrays and matrices are 2-d row-major float64 ndarrays; the aliases
below exist for signature readability only.  Gradients accumulate with
``+=`` across time steps and are reset explicitly via ``zero_grads``.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import OracleError, ShapeError

Vector = np.ndarray
Matrix = np.ndarray


def as_vector(data) -> Vector:
    v = np.asarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def as_matrix(data) -> Matrix:
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def affine(w: Matrix, x: Vector) -> Vector:
    """Matrix-vector product ``w @ x`` with an explicit shape check."""
    if w.ndim != 2 or x.ndim != 1 or w.shape[1] != x.shape[0]:
        raise ShapeError(
            f"affine shape mismatch: matrix {tuple(w.shape)} vs vector {tuple(x.shape)}"
        )
    return w @ x


def sigmoid_vec(x: Vector) -> Vector:
    """Elementwise logistic sigmoid, saturating in both tails (never NaN).

    The clip keeps exp finite for very negative inputs; very positive
    inputs underflow exp silently, yielding exactly 1.0.
    """
    return 1.0 / (1.0 + np.exp(np.minimum(-x, 709.0)))


def tanh_vec(x: Vector) -> Vector:
    """Elementwise hyperbolic tangent."""
    return np.tanh(x)


def softmax(x: Vector) -> Vector:
    """Probability vector via exp-normalize; the max is always subtracted first."""
    if x.size < 1:
        raise ShapeError("softmax requires at least one entry")
    e = np.exp(x - x.max())
    e /= e.sum()
    return e


class Parameter:
    """A named weight array paired with a same-shaped gradient accumulator.

    ``value`` and ``grad`` may be views into larger backing arrays; this
    lets groups of related matrices share one storage block for fused
    products while each keeps its own name and shape.
    """

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray, grad: np.ndarray | None = None):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        if grad is None:
            grad = np.zeros_like(self.value)
        elif grad.shape != self.value.shape:
            raise ShapeError(
                f"gradient shape {grad.shape} does not match value shape {self.value.shape}"
            )
        self.grad = grad

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Parameter({self.name!r}, shape={tuple(self.value.shape)})"


def zero_grads(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()


def grad_check(
    f: Callable[[], float],
    params: Sequence[Parameter],
    eps: float = 1e-5,
) -> float:
    """Compare stored analytic gradients against central differences.

    ``f`` is a scalar function of the current parameter values (a closure
    over ``params``); it must not touch the ``grad`` fields.  The caller
    fills ``grad`` analytically before invoking the check.  For every
    scalar entry the relative error
    ``|a - n| / max(|a|, |n|, 1e-8)`` is computed against the central
    difference ``(f(p + eps) - f(p - eps)) / (2 eps)``; the maximum over
    all entries is returned.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    worst = 0.0
    for p in params:
        flat_value = p.value.reshape(-1)
        flat_grad = p.grad.reshape(-1)
        for i in range(flat_value.size):
            original = flat_value[i]
            flat_value[i] = original + eps
            f_plus = f()
            flat_value[i] = original - eps
            f_minus = f()
            flat_value[i] = original
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise OracleError(
                    f"non-finite evaluation while probing {p.name}[{i}]"
                )
            numeric = (f_plus - f_minus) / (2.0 * eps)
            analytic = flat_grad[i]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            if rel > worst:
                worst = rel
    return worst
