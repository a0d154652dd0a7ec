"""Sample sets, their L-matrices and the stretch/rotation geometry of inexact reflections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateRotation, InvalidInput

# sin(theta) at or below this counts as parallel (theta = 0) or antiparallel
PARALLEL_TOL = 1e-14

__all__ = [
    "AdaptedPair",
    "GeometryReport",
    "SampleSet",
    "approx_diameter",
    "geometry",
    "l_matrix",
    "reflect",
    "rotation_basis",
]


def _as_dirs(dirs: ArrayLike, n: int | None = None) -> NDArray[np.float64]:
    d = np.array(dirs, dtype=float)
    if d.ndim == 1:
        # a flat list is p scalar directions when n == 1, otherwise a single direction
        d = d.reshape(-1, 1) if n == 1 else d.reshape(1, -1)
    if d.ndim != 2 or d.shape[0] < 1:
        raise InvalidInput("need at least one direction")
    if n is not None and d.shape[1] != n:
        raise InvalidInput(f"directions have dimension {d.shape[1]}, expected {n}")
    if not np.all(np.isfinite(d)):
        raise InvalidInput("directions have non-finite coordinates")
    if np.any(np.linalg.norm(d, axis=1) == 0.0):
        raise InvalidInput("every direction must be nonzero")
    return d


@dataclass(frozen=True)
class SampleSet:
    """Reference point ``y0`` and directions; the sample points are ``y0 + dirs[i]``.

    ``dirs`` has shape (p, n), one direction per row.
    """

    y0: NDArray[np.float64]
    dirs: NDArray[np.float64]

    def __init__(self, y0: ArrayLike, dirs: ArrayLike):
        y = np.atleast_1d(np.array(y0, dtype=float))
        if y.ndim != 1 or not np.all(np.isfinite(y)):
            raise InvalidInput("y0 must be a finite vector")
        d = _as_dirs(dirs, y.size)
        y.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "y0", y)
        object.__setattr__(self, "dirs", d)

    @classmethod
    def from_points(cls, y0: ArrayLike, points: ArrayLike) -> SampleSet:
        y = np.atleast_1d(np.array(y0, dtype=float))
        pts = np.array(points, dtype=float).reshape(-1, y.size)
        return cls(y, pts - y)

    @property
    def n(self) -> int:
        return self.y0.size

    @property
    def p(self) -> int:
        return self.dirs.shape[0]

    @property
    def points(self) -> NDArray[np.float64]:
        return self.y0 + self.dirs

    def scaled(self, factor: float) -> SampleSet:
        return SampleSet(self.y0, factor * self.dirs)


@dataclass(frozen=True)
class AdaptedPair:
    """A sample set and its (possibly inexact) reflection, points ``y0 - tilde_dirs[i]``."""

    plus: SampleSet
    tilde_dirs: NDArray[np.float64]

    def __init__(self, plus: SampleSet, tilde_dirs: ArrayLike):
        td = _as_dirs(tilde_dirs, plus.n)
        if td.shape[0] != plus.p:
            raise InvalidInput(
                f"reflected set has {td.shape[0]} directions, plus set has {plus.p}"
            )
        td.setflags(write=False)
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "tilde_dirs", td)

    @property
    def tilde_points(self) -> NDArray[np.float64]:
        return self.plus.y0 - self.tilde_dirs

    @property
    def tilde_set(self) -> SampleSet:
        """The reflected set written in L-matrix convention (directions -tilde_dirs)."""
        return SampleSet(self.plus.y0, -self.tilde_dirs)


@dataclass(frozen=True)
class GeometryReport:
    """Stretching parameters, rotation angles and rotation matrices per direction."""

    k: NDArray[np.float64]
    theta: NDArray[np.float64]
    bases: NDArray[np.float64]
    rotations: NDArray[np.float64]

    @property
    def Theta(self) -> float:
        return float(np.max(self.theta))

    @property
    def D(self) -> NDArray[np.float64]:
        return np.diag(self.k**2)


def l_matrix(s: SampleSet) -> NDArray[np.float64]:
    """n x p matrix whose i-th column is ``d_i``."""
    return np.array(s.dirs.T)


def approx_diameter(s: SampleSet) -> float:
    """Largest distance from ``y0`` to a sample point."""
    return float(np.max(np.linalg.norm(s.dirs, axis=1)))


def reflect(s: SampleSet) -> AdaptedPair:
    """Exact reflection of ``s`` through ``y0``."""
    return AdaptedPair(s, s.dirs)


def rotation_basis(u1: NDArray[np.float64], u2: NDArray[np.float64] | None) -> NDArray[np.float64]:
    """Orthogonal matrix with rows ``u1``, ``u2`` (when given), then a completion.

    The completion orthonormalizes standard basis vectors, always taking the one
    with the largest residual next, so the result depends only on the input.
    """
    n = u1.size
    rows = [u1] if u2 is None else [u1, u2]
    remaining = list(range(n))
    while len(rows) < n:
        q = np.array(rows)
        best, best_res = None, None
        for j in remaining:
            e = np.zeros(n)
            e[j] = 1.0
            r = e - q.T @ (q @ e)
            if best_res is None or np.linalg.norm(r) > np.linalg.norm(best_res):
                best, best_res = j, r
        remaining.remove(best)
        # second pass keeps orthogonality at working precision
        r = best_res - q.T @ (q @ best_res)
        rows.append(r / np.linalg.norm(r))
    return np.array(rows)


def geometry(pair: AdaptedPair) -> GeometryReport:
    """Stretch ratios, rotation angles, bases P_i and rotations A_i = P_i^T A'_i P_i.

    A'_i is the Givens block of angle theta_i padded with an identity; P_i has
    ``d_i/||d_i||`` as first row and the normalized component of ``tilde d_i``
    orthogonal to ``d_i`` as second row. For parallel pairs P_i = A_i = I.

    Raises:
        DegenerateRotation: If some ``tilde d_i`` is antiparallel to ``d_i``.
    """
    d = pair.plus.dirs
    td = pair.tilde_dirs
    p, n = d.shape
    nd = np.linalg.norm(d, axis=1)
    ntd = np.linalg.norm(td, axis=1)
    k = ntd / nd
    theta = np.zeros(p)
    bases = np.empty((p, n, n))
    rotations = np.empty((p, n, n))
    for i in range(p):
        u1 = d[i] / nd[i]
        along = td[i] @ u1
        w = td[i] - along * u1
        w = w - (w @ u1) * u1
        # below this the orthogonal part is round-off and its direction is meaningless
        if np.linalg.norm(w) <= PARALLEL_TOL * ntd[i]:
            if along > 0:
                bases[i] = np.eye(n)
                rotations[i] = np.eye(n)
                continue
            raise DegenerateRotation(
                f"direction {i}: reflected direction is antiparallel, rotation plane is not unique"
            )
        u2 = w / np.linalg.norm(w)
        # same angle as arccos of the clamped cosine, without its loss of digits near 0
        theta[i] = np.arctan2(np.linalg.norm(w), along)
        c, s = np.cos(theta[i]), np.sin(theta[i])
        givens = np.eye(n)
        givens[:2, :2] = [[c, -s], [s, c]]
        P = rotation_basis(u1, u2)
        bases[i] = P
        rotations[i] = P.T @ givens @ P

    for arr in (k, theta, bases, rotations):
        arr.setflags(write=False)
    return GeometryReport(k=k, theta=theta, bases=bases, rotations=rotations)
