"""Dense linear-algebra kernel.

Every matrix decomposition in the package goes through this module. The
pseudo-inverse is always computed from a singular value decomposition, which
is mixed forward-backward stable and handles non-square matrices uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInput, RankDeficient

DEFAULT_RANK_RTOL = 1e-12

__all__ = [
    "DEFAULT_RANK_RTOL",
    "PinvResult",
    "as_matrix",
    "col_projector",
    "cond2",
    "pinv",
    "spectral_norm",
]


@dataclass(frozen=True)
class PinvResult:
    """Pseudo-inverse together with the spectrum it was built from."""

    pinv: NDArray[np.float64]
    singular_values: NDArray[np.float64]
    numerical_rank: int

    @property
    def full_rank(self) -> bool:
        return self.numerical_rank == self.singular_values.size

    @property
    def sigma_ratio(self) -> float:
        """sigma_min / sigma_max over all singular values (0 for a zero matrix)."""
        s = self.singular_values
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def as_matrix(m: ArrayLike) -> NDArray[np.float64]:
    """Coerce to a finite 2-D float array; vectors become a single column."""
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise InvalidInput(f"expected a matrix, got an array with ndim={a.ndim}")
    if a.size == 0:
        raise InvalidInput("matrix must have at least one row and one column")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    return a


def pinv(m: ArrayLike, rank_rtol: float = DEFAULT_RANK_RTOL) -> PinvResult:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values at or below ``rank_rtol * sigma_max`` are treated as zero.
    Nothing is regularized silently: the number of retained values is reported
    as ``numerical_rank`` so callers can reject rank-deficient input.

    Args:
        m: Matrix of shape (rows, cols). A 1-D input is a single column.
        rank_rtol: Relative truncation threshold in (0, 1).

    Returns:
        PinvResult with ``pinv`` of shape (cols, rows).

    Raises:
        InvalidInput: On non-finite entries, a threshold outside (0, 1) or
            a pseudo-inverse too large to represent.
    """
    a = as_matrix(m)
    if not 0.0 < rank_rtol < 1.0:
        raise InvalidInput(f"rank_rtol must lie in (0, 1), got {rank_rtol}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rank_rtol * s[0]))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        inv = (vt[:rank].T / s[:rank]) @ u[:, :rank].T
    if not np.all(np.isfinite(inv)):
        raise InvalidInput("pseudo-inverse overflows double precision")
    return PinvResult(pinv=inv, singular_values=s, numerical_rank=rank)


def spectral_norm(m: ArrayLike) -> float:
    """Largest singular value; the Euclidean norm for a vector."""
    a = as_matrix(m)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def cond2(m: ArrayLike, rank_rtol: float = DEFAULT_RANK_RTOL) -> float:
    """Spectral condition number ||M^+|| ||M||.

    Raises:
        RankDeficient: If M does not have full numerical rank.
    """
    res = pinv(m, rank_rtol)
    if not res.full_rank:
        raise RankDeficient(
            f"matrix has numerical rank {res.numerical_rank} < "
            f"{res.singular_values.size} (sigma_min/sigma_max = {res.sigma_ratio:.3e})"
        )
    s = res.singular_values
    return float(s[0] / s[-1])


def col_projector(a: ArrayLike, rank_rtol: float = DEFAULT_RANK_RTOL) -> NDArray[np.float64]:
    """Orthogonal projector A A^+ onto col(A).

    Formed as U_r U_r^T from the retained left singular vectors, which equals
    A A^+ and stays symmetric to working precision.
    """
    mat = as_matrix(a)
    if not 0.0 < rank_rtol < 1.0:
        raise InvalidInput(f"rank_rtol must lie in (0, 1), got {rank_rtol}")
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = 0 if s[0] == 0.0 else int(np.count_nonzero(s > rank_rtol * s[0]))
    ur = u[:, :rank]
    p = ur @ ur.T
    return 0.5 * (p + p.T)
