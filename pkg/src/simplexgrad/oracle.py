"""Test functions with analytic derivatives and known Lipschitz constants, plus noise models.

Each :class:`TestFunction` carries a ball ``B(center, radius)`` on which its
Lipschitz constants ``nu_grad`` (for the gradient) and ``nu_hess`` (for the
Hessian) are valid. Constants are sound upper bounds, not necessarily sharp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInput
from .schemes import SchemeMatrices

__all__ = [
    "NoiseMode",
    "NoiseModel",
    "TestFunction",
    "affine",
    "builtin_registry",
    "cubic1d",
    "evaluate_noisy",
    "fvalues_for",
    "lookup",
    "quadratic",
    "rosenbrock",
    "sum_exp",
]

# Rosenbrock on B(1,1; 0.5): sup ||Hessian|| ~ 2471.0 and sup ||D^3 f[v]|| ~ 3665.3
# (dense sampling of the disc and unit v), rounded up.
ROSENBROCK_NU_GRAD = 2500.0
ROSENBROCK_NU_HESS = 3700.0


@dataclass(frozen=True)
class TestFunction:
    name: str
    dim: int
    f: Callable[[NDArray[np.float64]], float]
    grad: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    hess: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    nu_grad: float
    nu_hess: float
    center: NDArray[np.float64]
    radius: float
    description: str = ""

    __test__ = False  # keep pytest from collecting this class

    def __call__(self, x: ArrayLike) -> float:
        return float(self.f(np.asarray(x, dtype=float)))

    def gradient(self, x: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float)

    def hessian(self, x: ArrayLike) -> NDArray[np.float64]:
        return np.atleast_2d(np.asarray(self.hess(np.asarray(x, dtype=float)), dtype=float))

    def contains(self, points: ArrayLike, slack: float = 1e-12) -> bool:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return bool(np.all(np.linalg.norm(pts - self.center, axis=1) <= self.radius * (1 + slack)))

    def summary(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "nu_grad": self.nu_grad,
            "nu_hess": self.nu_hess,
            "center": self.center.tolist(),
            "radius": self.radius,
            "description": self.description,
        }


def _vec(x, n=None):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if n is not None and v.size != n:
        raise InvalidInput(f"expected a vector of length {n}, got {v.size}")
    return v


def affine(c: ArrayLike, c0: float = 0.0) -> TestFunction:
    """f(x) = c.x + c0; every derivative beyond the first vanishes."""
    c = _vec(c)
    n = c.size
    return TestFunction(
        name="affine", dim=n,
        f=lambda x: float(c @ x + c0),
        grad=lambda x: c.copy(),
        hess=lambda x: np.zeros((n, n)),
        nu_grad=0.0, nu_hess=0.0,
        center=np.zeros(n), radius=math.inf,
        description="c.x + c0",
    )


def quadratic(H: ArrayLike, b: ArrayLike | None = None, c: float = 0.0,
              name: str = "quad") -> TestFunction:
    """f(x) = x.H.x / 2 + b.x + c, so H=[[2]] gives x^2."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    if H.shape != (n, n) or not np.allclose(H, H.T, rtol=0, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise InvalidInput("H must be a symmetric square matrix")
    H = 0.5 * (H + H.T)
    b = np.zeros(n) if b is None else _vec(b, n)
    return TestFunction(
        name=name, dim=n,
        f=lambda x: float(0.5 * x @ H @ x + b @ x + c),
        grad=lambda x: H @ x + b,
        hess=lambda x: H.copy(),
        nu_grad=float(np.linalg.norm(H, 2)), nu_hess=0.0,
        center=np.zeros(n), radius=math.inf,
        description="x.H.x/2 + b.x + c",
    )


def cubic1d(center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """f(x) = x^3. The Hessian 6x is 6-Lipschitz everywhere."""
    c = float(center)
    return TestFunction(
        name="cubic1d", dim=1,
        f=lambda x: float(x[0] ** 3),
        grad=lambda x: np.array([3.0 * x[0] ** 2]),
        hess=lambda x: np.array([[6.0 * x[0]]]),
        nu_grad=6.0 * (abs(c) + radius), nu_hess=6.0,
        center=np.array([c]), radius=float(radius),
        description="x^3",
    )


def sum_exp(n: int = 2, center: ArrayLike | None = None, radius: float = 1.0) -> TestFunction:
    """f(x) = sum_i exp(x_i).

    Both the Hessian diag(exp(x)) and its variation are bounded by
    exp(max_i c_i + radius) on the ball, which serves as both constants.
    """
    c = np.zeros(n) if center is None else _vec(center, n)
    nu = math.exp(float(np.max(c)) + radius)
    return TestFunction(
        name="sumexp", dim=n,
        f=lambda x: float(np.sum(np.exp(x))),
        grad=lambda x: np.exp(x),
        hess=lambda x: np.diag(np.exp(x)),
        nu_grad=nu, nu_hess=nu,
        center=c, radius=float(radius),
        description="sum_i exp(x_i)",
    )


def rosenbrock() -> TestFunction:
    """(1 - x)^2 + 100 (y - x^2)^2 on the ball of radius 0.5 about (1, 1)."""

    def f(x):
        return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)

    def grad(x):
        return np.array([
            -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2),
            200 * (x[1] - x[0] ** 2),
        ])

    def hess(x):
        return np.array([
            [2 - 400 * x[1] + 1200 * x[0] ** 2, -400 * x[0]],
            [-400 * x[0], 200.0],
        ])

    return TestFunction(
        name="rosenbrock", dim=2, f=f, grad=grad, hess=hess,
        nu_grad=ROSENBROCK_NU_GRAD, nu_hess=ROSENBROCK_NU_HESS,
        center=np.array([1.0, 1.0]), radius=0.5,
        description="(1-x)^2 + 100(y-x^2)^2",
    )


def builtin_registry() -> list[TestFunction]:
    return [
        affine([3.0, 4.0]),
        quadratic([[2.0]]),
        quadratic([[3.0, 1.0], [1.0, 2.0]], name="quad2d"),
        cubic1d(),
        sum_exp(2),
        rosenbrock(),
    ]


def lookup(name: str, dim: int | None = None, center: ArrayLike | None = None,
           radius: float | None = None) -> TestFunction:
    """Builtin function by name, re-centred where the constants depend on the ball.

    ``sumexp`` and ``cubic1d`` take their dimension, centre and radius from the
    arguments; the rest are fixed and only checked for dimension.
    """
    key = name.lower()
    if key == "sumexp":
        n = dim if dim is not None else (2 if center is None else _vec(center).size)
        return sum_exp(n, center, 1.0 if radius is None else radius)
    if key == "cubic1d":
        c = 0.0 if center is None else float(_vec(center, 1)[0])
        return cubic1d(c, 1.0 if radius is None else radius)
    for tf in builtin_registry():
        if tf.name == key:
            if dim is not None and dim != tf.dim:
                raise InvalidInput(f"function {name!r} has dimension {tf.dim}, not {dim}")
            return tf
    names = ", ".join(tf.name for tf in builtin_registry())
    raise InvalidInput(f"unknown function {name!r}; available: {names}")


class NoiseMode(str, enum.Enum):
    OFF = "off"
    FIXED_PLUS = "fixed_plus"
    FIXED_ALTERNATING = "fixed_alternating"
    UNIFORM_RANDOM = "uniform_random"


@dataclass(frozen=True)
class NoiseModel:
    """Relative perturbation f(x)(1 + eps_x) with |eps_x| <= level.

    ``additive=True`` switches to f(x) + eps_x, which is not the default error
    model of the analysis and is only meant for harness experiments.
    """

    level: float = 0.0
    mode: NoiseMode = NoiseMode.OFF
    seed: int = 0
    additive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if not self.level >= 0:
            raise InvalidInput(f"noise level must be nonnegative, got {self.level}")

    def epsilon(self, call_index: int) -> float:
        """eps_x for the ``call_index``-th evaluation; stateless in the index."""
        if self.mode is NoiseMode.OFF or self.level == 0.0:
            return 0.0
        if self.mode is NoiseMode.FIXED_PLUS:
            return self.level
        if self.mode is NoiseMode.FIXED_ALTERNATING:
            return self.level if call_index % 2 == 0 else -self.level
        # counter-based: the key is the seed, the counter is the call index
        bitgen = np.random.Philox(key=self.seed, counter=call_index)
        u = np.random.Generator(bitgen).random()
        return self.level * (2.0 * u - 1.0)


def evaluate_noisy(tf: TestFunction, x: ArrayLike, nm: NoiseModel, call_index: int = 0) -> float:
    fx = tf(x)
    eps = nm.epsilon(call_index)
    if nm.additive:
        return fx + eps
    return (1.0 + eps) * fx


def fvalues_for(sch: SchemeMatrices, tf: TestFunction,
                nm: NoiseModel | None = None) -> NDArray[np.float64]:
    """Function values at the scheme points, in scheme order, with call_index = point index."""
    nm = NoiseModel() if nm is None else nm
    if sch.n != tf.dim:
        raise InvalidInput(f"scheme lives in R^{sch.n} but {tf.name} is defined on R^{tf.dim}")
    return np.array([evaluate_noisy(tf, y, nm, i) for i, y in enumerate(sch.points)])
