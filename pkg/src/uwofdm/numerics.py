"""Dense complex DFT and linear-algebra kernels.

The whole package is pinned to the unnormalized DFT convention

    F[m, n] = w**(m*n),   w = exp(-2j*pi/N),
    forward(v) = F @ v,   inverse(v) = F.conj().T @ v / N.

Several receiver covariance expressions (notably the factor N in the
noise covariance after zero forcing) are only correct under this
convention, so it is frozen here and nowhere else.  Transform sizes stay
small (N <= 64), so plain dense matrix products are used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NumericallySingularError

#: Reciprocal condition number below which solves are refused.
RCOND_FLOOR = 1e-12


@lru_cache(maxsize=32)
def _dft_matrix(size: int) -> np.ndarray:
    n = np.arange(size)
    w = np.exp(-2j * np.pi / size)
    matrix = w ** np.outer(n, n)
    matrix.flags.writeable = False
    return matrix


@dataclass(frozen=True)
class DftPlan:
    """Forward/inverse DFT matrices of a fixed size.

    The matrix is symmetric (F.T == F), so row-stacked batches transform
    as ``v @ F``.  Matrices are cached per size and shared read-only.
    """

    size: int
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"DFT size must be positive, got {self.size}")
        object.__setattr__(self, "matrix", _dft_matrix(self.size))

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self.matrix.conj() / self.size


def forward_dft(v: np.ndarray, plan: DftPlan) -> np.ndarray:
    """Unnormalized forward DFT of ``v`` (last axis must match the plan size)."""
    v = np.asarray(v)
    if v.shape[-1] != plan.size:
        raise ValueError(f"vector length {v.shape[-1]} != plan size {plan.size}")
    return v @ plan.matrix  # F is symmetric


def inverse_dft(v: np.ndarray, plan: DftPlan) -> np.ndarray:
    """Inverse DFT, i.e. ``F^H v / N`` (last axis must match the plan size)."""
    v = np.asarray(v)
    if v.shape[-1] != plan.size:
        raise ValueError(f"vector length {v.shape[-1]} != plan size {plan.size}")
    return v @ plan.matrix.conj() / plan.size


def condition_estimate(a: np.ndarray) -> float:
    """2-norm condition number (SVD based; matrices here are at most 64x64)."""
    return float(np.linalg.cond(np.asarray(a)))


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` with an explicit conditioning check.

    Raises NumericallySingularError when the reciprocal condition number
    falls below RCOND_FLOOR, i.e. when double precision can no longer
    support the requested solve.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    cond = condition_estimate(a)
    if not np.isfinite(cond) or cond > 1.0 / RCOND_FLOOR:
        raise NumericallySingularError("matrix is numerically singular", cond)
    return np.linalg.solve(a, np.asarray(b))
