"""Matrix form (A, B) of the GSG, GCSG and GACSG and their evaluation.

Every scheme is written as ``grad = pinv(A^T) @ B @ f`` where ``f`` lists the
function values in a fixed point order: ``y0`` first, then ``y0 + d_i`` in
direction order, then the reflected points ``y0 - tilde d_i`` (centred kinds).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInput, NotPoised
from .geometry import (
    AdaptedPair,
    GeometryReport,
    SampleSet,
    approx_diameter,
    geometry,
    l_matrix,
    reflect,
)
from .linalg import DEFAULT_RANK_RTOL, col_projector, pinv

__all__ = [
    "SchemeKind",
    "SchemeMatrices",
    "build",
    "build_gacsg",
    "build_gcsg",
    "build_gsg",
    "delta_vector",
    "evaluate",
    "project",
]


class SchemeKind(str, enum.Enum):
    GSG = "GSG"
    GCSG = "GCSG"
    GACSG = "GACSG"

    @classmethod
    def parse(cls, value: str | SchemeKind) -> SchemeKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise InvalidInput(f"unknown scheme {value!r}; expected GSG, GCSG or GACSG") from None


@dataclass(frozen=True)
class SchemeMatrices:
    """The (A, B) pair, evaluation points and sizes for one scheme instance.

    ``delta`` is the approximate diameter of the plus set, the Delta the
    error bounds are stated in.
    """

    kind: SchemeKind
    A: NDArray[np.float64]
    B: NDArray[np.float64]
    points: NDArray[np.float64]
    p: int
    q: int
    z: int
    delta: float
    sigma_ratio: float
    geometry: GeometryReport | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def y0(self) -> NDArray[np.float64]:
        return self.points[0]

    def norm_A_dagger(self, rank_rtol: float = DEFAULT_RANK_RTOL) -> float:
        """||A^+||, i.e. 1 / sigma_min(A)."""
        s = pinv(self.A, rank_rtol).singular_values
        return float(1.0 / s[-1])

    def kappa(self, rank_rtol: float = DEFAULT_RANK_RTOL) -> float:
        s = pinv(self.A, rank_rtol).singular_values
        return float(s[0] / s[-1])

    def norm_Lhat_dagger(self, rank_rtol: float = DEFAULT_RANK_RTOL) -> float:
        """The scaled pseudo-inverse norm entering the approximation bounds.

        GSG: ||(L/Delta)^+||; GCSG: ||(L+/Delta)^+||, which is twice Delta*||A^+||
        because A = 2 L+; GACSG: ||((L+ D - L~)/Delta)^+||. All are computed as
        multiples of Delta * ||A^+|| rather than by refactorizing a scaled matrix.
        """
        scale = 2.0 if self.kind is SchemeKind.GCSG else 1.0
        return scale * self.delta * self.norm_A_dagger(rank_rtol)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "points": self.points.tolist(),
            "z": self.z,
            "q": self.q,
            "p": self.p,
        }


def _check_poised(A: NDArray[np.float64], rank_rtol: float, what: str) -> float:
    res = pinv(A, rank_rtol)
    if not res.full_rank:
        raise NotPoised(
            f"{what} is not full rank at rank_rtol={rank_rtol:g}: numerical rank "
            f"{res.numerical_rank} < {res.singular_values.size}, "
            f"sigma_min/sigma_max = {res.sigma_ratio:.3e}",
            sigma_ratio=res.sigma_ratio,
        )
    return res.sigma_ratio


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def build_gsg(s: SampleSet, rank_rtol: float = DEFAULT_RANK_RTOL) -> SchemeMatrices:
    """Generalized simplex gradient: A = L, B = [-1 | I_p]."""
    A = l_matrix(s)
    ratio = _check_poised(A, rank_rtol, "L")
    p = s.p
    B = np.hstack([-np.ones((p, 1)), np.eye(p)])
    points = np.vstack([s.y0, s.points])
    _freeze(A, B, points)
    return SchemeMatrices(SchemeKind.GSG, A, B, points, p=p, q=p, z=p,
                          delta=approx_diameter(s), sigma_ratio=ratio)


def build_gcsg(s: SampleSet, rank_rtol: float = DEFAULT_RANK_RTOL) -> SchemeMatrices:
    """Generalized centred simplex gradient: A = 2L+, B = [0 | I_p | -I_p]."""
    A = 2.0 * l_matrix(s)
    ratio = _check_poised(A, rank_rtol, "L+")
    p = s.p
    B = np.hstack([np.zeros((p, 1)), np.eye(p), -np.eye(p)])
    points = np.vstack([s.y0, s.y0 + s.dirs, s.y0 - s.dirs])
    _freeze(A, B, points)
    return SchemeMatrices(SchemeKind.GCSG, A, B, points, p=p, q=2 * p, z=p,
                          delta=approx_diameter(s), sigma_ratio=ratio)


def build_gacsg(pair: AdaptedPair, rank_rtol: float = DEFAULT_RANK_RTOL) -> SchemeMatrices:
    """Generalized adapted centred simplex gradient.

    A = L+ D - L~, whose i-th column is ``k_i^2 d_i + tilde d_i``; row i of B is
    ``(1 - k_i^2, k_i^2 e_i, -e_i)``.
    """
    geo = geometry(pair)
    s = pair.plus
    k2 = geo.k**2
    A = s.dirs.T * k2 + pair.tilde_dirs.T
    ratio = _check_poised(A, rank_rtol, "L+ D - L~")
    p = s.p
    B = np.hstack([(1.0 - k2)[:, None], np.diag(k2), -np.eye(p)])
    points = np.vstack([s.y0, s.points, pair.tilde_points])
    _freeze(A, B, points)
    return SchemeMatrices(SchemeKind.GACSG, A, B, points, p=p, q=2 * p, z=p,
                          delta=approx_diameter(s), sigma_ratio=ratio, geometry=geo)


def build(kind: SchemeKind | str, sample: SampleSet | AdaptedPair,
          rank_rtol: float = DEFAULT_RANK_RTOL) -> SchemeMatrices:
    """Dispatch on ``kind``; a bare SampleSet is reflected exactly for GACSG."""
    kind = SchemeKind.parse(kind)
    if kind is SchemeKind.GACSG:
        pair = sample if isinstance(sample, AdaptedPair) else reflect(sample)
        return build_gacsg(pair, rank_rtol)
    s = sample.plus if isinstance(sample, AdaptedPair) else sample
    if kind is SchemeKind.GSG:
        return build_gsg(s, rank_rtol)
    return build_gcsg(s, rank_rtol)


def _fvec(sch: SchemeMatrices, f: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(f, dtype=float).ravel()
    if v.size != sch.q + 1:
        raise InvalidInput(f"{sch.kind.value} needs {sch.q + 1} function values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("function values must be finite")
    return v


def delta_vector(sch: SchemeMatrices, f: ArrayLike) -> NDArray[np.float64]:
    """B f, the vector of (weighted) function-value differences."""
    return sch.B @ _fvec(sch, f)


def evaluate(sch: SchemeMatrices, f: ArrayLike,
             rank_rtol: float = DEFAULT_RANK_RTOL) -> NDArray[np.float64]:
    """The simplex derivative pinv(A^T) B f.

    This is the raw estimate; only its projection onto col(A) is controlled by
    the approximation bounds (see :func:`project`).
    """
    return pinv(sch.A.T, rank_rtol).pinv @ delta_vector(sch, f)


def project(sch: SchemeMatrices, v: ArrayLike,
            rank_rtol: float = DEFAULT_RANK_RTOL) -> NDArray[np.float64]:
    """Orthogonal projection of ``v`` onto col(A)."""
    return col_projector(sch.A, rank_rtol) @ np.asarray(v, dtype=float)
