"""Dense linear algebra and derivative checking.

Matrices and vectors are plain float64 numpy arrays (row-major, C order).
The helpers here add the shape/finiteness checks and the jitter policy that
the model code relies on; the heavy lifting is delegated to LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lapack, solve_triangular

DEFAULT_JITTER = 1e-10
MAX_JITTER = 1e-6
SYMMETRY_TOL = 1e-10


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix stays indefinite after the jitter ladder.

    ``pivot`` is the zero-based index of the first non-positive pivot.
    """

    def __init__(self, pivot: int, jitter: float):
        self.pivot = pivot
        self.jitter = jitter
        super().__init__(
            f"matrix is not positive definite: pivot {pivot} is non-positive "
            f"(jitter up to {jitter:.1e})"
        )


class EvaluationError(ValueError):
    """A function evaluated during a numerical check returned non-finite values."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(arr)


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T == A + jitter * I``."""

    lower: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def cholesky(
    a, jitter: float = 0.0, max_jitter: float = MAX_JITTER, check: bool = True
) -> CholeskyFactor:
    """Factor a symmetric positive definite matrix.

    The factorization is first tried with ``jitter`` added to the diagonal.
    On failure the jitter is raised to ``DEFAULT_JITTER`` (if it was smaller)
    and then multiplied by 10 until it exceeds ``max_jitter``, at which point
    :class:`NotPositiveDefiniteError` reports the failing pivot.

    ``check=False`` skips the finiteness and symmetry validation for callers
    that build ``a`` symmetric by construction.
    """
    a = as_matrix(a, "a") if check else np.asarray(a, dtype=np.float64)
    n, m = a.shape
    if n != m:
        raise ValueError(f"cholesky needs a square matrix, got {a.shape}")
    if check and n and np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError("cholesky needs a symmetric matrix")

    current = float(jitter)
    while True:
        if current:
            shifted = a.copy()
            shifted.flat[:: n + 1] += current
        else:
            shifted = a
        c, info = lapack.dpotrf(shifted, lower=1, clean=1)
        if info == 0:
            return CholeskyFactor(c, current)
        if info < 0:  # pragma: no cover - invalid argument to LAPACK
            raise RuntimeError(f"dpotrf argument {-info} invalid")
        pivot = info - 1
        if current >= max_jitter * (1 - 1e-9):
            raise NotPositiveDefiniteError(pivot, current)
        current = DEFAULT_JITTER if current < DEFAULT_JITTER else current * 10.0


def solve_cholesky(f: CholeskyFactor, b) -> np.ndarray:
    """Solve ``(L L^T) x = b`` by forward then back substitution.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != f.dim:
        raise ValueError(f"dimension mismatch: factor is {f.dim}, rhs has {b.shape[0]} rows")
    z = solve_triangular(f.lower, b, lower=True, check_finite=False)
    return solve_triangular(f.lower.T, z, lower=False, check_finite=False)


def cholesky_inverse(f: CholeskyFactor) -> np.ndarray:
    """Full symmetric inverse of ``L L^T``."""
    inv, info = lapack.dpotri(f.lower, lower=1)
    if info != 0:  # pragma: no cover - factor is already validated
        raise np.linalg.LinAlgError(f"dpotri failed with info={info}")
    inv = np.tril(inv)
    return inv + np.tril(inv, -1).T


def finite_difference_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-6
) -> np.ndarray:
    """Central-difference Jacobian, ``J[i, j] = (f_i(x + h e_j) - f_i(x - h e_j)) / 2h``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    x = as_vector(x, "x")
    cols = []
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = h
        hi = np.atleast_1d(np.asarray(f(x + step), dtype=np.float64))
        lo = np.atleast_1d(np.asarray(f(x - step), dtype=np.float64))
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise EvaluationError(f"non-finite function value while perturbing coordinate {j}")
        cols.append((hi - lo) / (2.0 * h))
    if not cols:
        out = np.atleast_1d(np.asarray(f(x), dtype=np.float64))
        return np.zeros((out.size, 0))
    return np.column_stack(cols)
