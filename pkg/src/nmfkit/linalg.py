"""Small dense linear-algebra kernels shared by the solvers and the harness.

Matrices are plain 2-D float64 ndarrays. Every operation validates shapes at
its boundary and treats its inputs as immutable values.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "NumericError",
    "as_matrix",
    "require_finite",
    "matmul",
    "transpose",
    "frobenius_norm",
    "frobenius_inner",
    "project_nonneg",
    "solve_least_squares",
]


class ShapeError(ValueError):
    """Operand shapes do not conform."""


class NumericError(ValueError):
    """Non-finite values where finite ones are required."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    return m


def require_finite(a: np.ndarray, name: str = "matrix") -> None:
    """Raise NumericError if ``a`` has NaN or infinite entries."""
    if not np.isfinite(a).all():
        raise NumericError(f"{name} contains non-finite entries")


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit conformance checking."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def transpose(a) -> np.ndarray:
    return as_matrix(a).T


def frobenius_norm(a) -> float:
    """sqrt of the sum of squared entries."""
    return float(np.linalg.norm(as_matrix(a)))


def frobenius_inner(a, b) -> float:
    """Entrywise inner product sum(a * b)."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"shapes {a.shape} and {b.shape} differ")
    return float(np.vdot(a, b))


def project_nonneg(a) -> np.ndarray:
    """Nearest nonnegative matrix: clamp every entry at zero."""
    return np.maximum(as_matrix(a), 0.0)


def solve_least_squares(a, b, rcond: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution X of a @ X = b, column by column.

    SVD based, so rank-deficient ``a`` (including the zero matrix) is fine.
    ``rcond`` is the relative singular-value cutoff; None means the usual
    pseudoinverse choice eps * max(a.shape) * sigma_max. Pass a smaller value
    to keep nearly-singular directions.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"row counts differ: a is {a.shape}, b is {b.shape}")
    require_finite(a, "a")
    require_finite(b, "b")
    x, *_ = np.linalg.lstsq(a, b, rcond=rcond)
    return x
