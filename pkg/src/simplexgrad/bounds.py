"""Approximation-error and floating-point-error bounds, and the optimal sample-set diameter.

Notation used throughout:

* ``Delta`` -- approximate diameter of the plus sample set.
* ``norm_Lhat_dagger`` -- the pseudo-inverse norm of the Delta-normalized
  direction matrix that the approximation bounds are stated in.
* ``norm_A_dagger``, ``kappa_A`` -- ||A^+|| and the condition number of the
  scheme matrix A at the actual scale.
* ``eps_star`` -- machine precision, or a function-noise level substituted for it.

The floating-point bounds assume a pseudo-inverse algorithm that is mixed
forward-backward stable with constant ``C``; they all carry the factor

    S = sqrt(2) C kappa / (1 - C kappa eps) + (C + 1) / ((1 - C eps)(1 - C kappa eps)).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInput, MissingRegime, StabilityViolation
from .geometry import GeometryReport
from .linalg import DEFAULT_RANK_RTOL, spectral_norm
from .schemes import SchemeKind, SchemeMatrices

MACHINE_EPS = float(np.finfo(float).eps)

REGIMES = ("rotation-dominated", "curvature-dominated")

__all__ = [
    "MACHINE_EPS",
    "REGIMES",
    "BNorm",
    "BoundBreakdown",
    "BoundInputs",
    "CurvatureData",
    "approx_bound",
    "bound_inputs",
    "breakdown",
    "combined_fpe_bound",
    "curvature_constants",
    "delta_min",
    "feval_fpe_bound",
    "fpe_bound",
    "gacsg_approx_bound",
    "gacsg_regime_advice",
    "gcsg_approx_bound",
    "gsg_approx_bound",
    "gsg_tight_fpe_bound",
    "pinv_fpe_bound",
    "rough_inputs",
    "scheme_B_norm",
    "scheme_delta_min",
    "total_bound",
]


@dataclass(frozen=True)
class BoundInputs:
    """Scalar inputs shared by the bound formulas.

    Defaults reproduce the rough-estimate setting nu = f_M = C = 1 at double
    precision for a single well-conditioned direction.
    """

    nu: float = 1.0
    f_M: float = 1.0
    C: float = 1.0
    eps_star: float = MACHINE_EPS
    p: int = 1
    q: int = 1
    norm_A_dagger: float = 1.0
    kappa_A: float = 1.0
    norm_B: float = math.sqrt(2.0)
    norm_Lhat_dagger: float = 1.0

    def __post_init__(self):
        for name in ("nu", "f_M", "C", "eps_star", "norm_A_dagger", "norm_B", "norm_Lhat_dagger"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidInput(f"{name} must be finite and nonnegative, got {v}")
        if not (np.isfinite(self.kappa_A) and self.kappa_A >= 1.0):
            raise InvalidInput(f"kappa_A must be >= 1, got {self.kappa_A}")
        if self.p < 1 or self.q < 0:
            raise InvalidInput(f"need p >= 1 and q >= 0, got p={self.p}, q={self.q}")

    def with_(self, **changes) -> BoundInputs:
        return replace(self, **changes)


class BNorm(NamedTuple):
    """||B|| as used in the bounds (``value``) next to the computed spectral norm."""

    value: float
    exact: float


@dataclass(frozen=True)
class CurvatureData:
    """Hessian at y0 and the per-direction curvature constants of the GACSG bound."""

    H: NDArray[np.float64]
    kappa1: NDArray[np.float64]
    kappa2: NDArray[np.float64]

    @property
    def K1(self) -> float:
        return float(np.max(self.kappa1))

    @property
    def K2(self) -> float:
        return float(np.max(self.kappa2))


def _positive_delta(Delta: float) -> float:
    if not (np.isfinite(Delta) and Delta > 0):
        raise InvalidInput(f"Delta must be positive, got {Delta}")
    return float(Delta)


def _stability_factor(inp: BoundInputs) -> float:
    C, eps, kappa = inp.C, inp.eps_star, inp.kappa_A
    if C * eps * kappa >= 1.0:
        raise StabilityViolation(
            f"C*eps*kappa(A) = {C * eps * kappa:.3e} >= 1; floating-point bounds do not apply"
        )
    denom = 1.0 - C * kappa * eps
    return math.sqrt(2.0) * C * kappa / denom + (C + 1.0) / ((1.0 - C * eps) * denom)


# -- approximation bounds ---------------------------------------------------


def gsg_approx_bound(inp: BoundInputs, Delta: float) -> float:
    """(nu sqrt(p) / 2) ||Lhat^+|| Delta; nu is the Lipschitz constant of the gradient."""
    Delta = _positive_delta(Delta)
    return inp.nu * math.sqrt(inp.p) / 2.0 * inp.norm_Lhat_dagger * Delta


def gcsg_approx_bound(inp: BoundInputs, Delta: float) -> float:
    """(nu sqrt(p) / 6) ||(Lhat+)^+|| Delta^2; nu is the Lipschitz constant of the Hessian."""
    Delta = _positive_delta(Delta)
    return inp.nu * math.sqrt(inp.p) / 6.0 * inp.norm_Lhat_dagger * Delta**2


def curvature_constants(H: ArrayLike, bases: ArrayLike) -> CurvatureData:
    """kappa1, kappa2 of each direction from h = P_i H P_i^T.

    kappa1 = sqrt((h11 - h22)^2 + 4 h12^2) and
    kappa2 = sqrt(a + b + sqrt((a - b)^2 + 4 c^2)) with a = sum_{l>=3} h1l^2,
    b = sum_{l>=3} h2l^2, c = sum_{l>=3} h1l h2l. Entries that do not exist
    for n < 3 (or n = 1) are taken as zero, so K2 = 0 whenever n <= 2.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    if H.shape != (n, n) or not np.all(np.isfinite(H)):
        raise InvalidInput("H must be a finite square matrix")
    if np.linalg.norm(H - H.T) > 1e-12 * max(np.linalg.norm(H), 1e-300):
        raise InvalidInput("H must be symmetric")
    P = np.asarray(bases, dtype=float).reshape(-1, n, n)
    h = P @ H @ np.swapaxes(P, 1, 2)
    if n == 1:
        padded = np.zeros((h.shape[0], 2, 2))
        padded[:, 0, 0] = h[:, 0, 0]
        h = padded
    kappa1 = np.sqrt((h[:, 0, 0] - h[:, 1, 1]) ** 2 + 4.0 * h[:, 0, 1] ** 2)
    tail1, tail2 = h[:, 0, 2:], h[:, 1, 2:]
    a = np.sum(tail1**2, axis=1)
    b = np.sum(tail2**2, axis=1)
    c = np.sum(tail1 * tail2, axis=1)
    kappa2 = np.sqrt(a + b + np.sqrt((a - b) ** 2 + 4.0 * c**2))
    return CurvatureData(H=H, kappa1=kappa1, kappa2=kappa2)


def _gacsg_c2(inp: BoundInputs, geo: GeometryReport) -> float:
    k = geo.k
    return inp.nu / 6.0 * float(np.max(k**2 * (1.0 + k))) * math.sqrt(inp.p) * inp.norm_Lhat_dagger


def _gacsg_terms(inp: BoundInputs, geo: GeometryReport,
                 curv: CurvatureData | None) -> tuple[float, float]:
    """Delta-free coefficients (c1, c2) with bound = c1 Delta + c2 Delta^2."""
    k = geo.k
    root_p = math.sqrt(inp.p)
    c2 = _gacsg_c2(inp, geo)
    if curv is None:
        if np.any(geo.theta > 0):
            raise InvalidInput("curvature constants are required when some rotation angle is nonzero")
        return 0.0, c2
    sin_max = float(np.max(np.sin(geo.theta)))
    # sqrt(1 - cos t) = sqrt(2) sin(t/2), without cancellation for small t
    vers_max = float(np.max(math.sqrt(2.0) * np.sin(geo.theta / 2.0)))
    rot = curv.K1 * sin_max + curv.K2 * vers_max
    c1 = 0.5 * float(np.max(k**2)) * root_p * rot * inp.norm_Lhat_dagger
    return c1, c2


def gacsg_approx_bound(inp: BoundInputs, geo: GeometryReport,
                       curv: CurvatureData | None, Delta: float) -> float:
    """Rotation term linear in Delta plus curvature term quadratic in Delta.

    ``curv`` may be omitted only when all rotation angles are zero.
    """
    Delta = _positive_delta(Delta)
    c1, c2 = _gacsg_terms(inp, geo, curv)
    return c1 * Delta + c2 * Delta**2


# -- floating-point bounds --------------------------------------------------


def pinv_fpe_bound(inp: BoundInputs) -> float:
    """Bound on ||pinv(A^T) - computed pinv(A^T)|| for a stable algorithm."""
    C, eps, kappa = inp.C, inp.eps_star, inp.kappa_A
    if C * eps * kappa >= 1.0:
        raise StabilityViolation(
            f"C*eps*kappa(A) = {C * eps * kappa:.3e} >= 1; floating-point bounds do not apply"
        )
    return (C * inp.norm_A_dagger * eps / (1.0 - C * kappa * eps)) * (
        math.sqrt(2.0) * kappa + 1.0 / (1.0 - C * eps)
    )


def feval_fpe_bound(inp: BoundInputs) -> float:
    """sqrt(q+1) f_M ||A^+|| ||B|| eps: effect of relative errors in the function values alone."""
    return math.sqrt(inp.q + 1) * inp.f_M * inp.norm_A_dagger * inp.norm_B * inp.eps_star


def combined_fpe_bound(inp: BoundInputs) -> float:
    """Pseudo-inverse and function-evaluation errors together."""
    base = math.sqrt(inp.q + 1) * inp.f_M * inp.norm_A_dagger * inp.norm_B * inp.eps_star
    return base * _stability_factor(inp)


def gsg_tight_fpe_bound(inp: BoundInputs) -> float:
    """GSG-specific bound 2 sqrt(p) f_M ||L^+|| eps S.

    Replaces the generic factor sqrt(p+1) ||B|| = p + 1 and is smaller for p >= 2.
    ``norm_A_dagger`` and ``kappa_A`` refer to L here.
    """
    base = 2.0 * math.sqrt(inp.p) * inp.f_M * inp.norm_A_dagger * inp.eps_star
    return base * _stability_factor(inp)


def scheme_B_norm(sch: SchemeMatrices) -> BNorm:
    """||B|| per scheme.

    GSG: sqrt(p+1) exactly. GCSG: sqrt(2). GACSG: the upper bound
    sqrt(sum (1 - k_i^2)^2 + max(k_i^4 + 1)).
    """
    exact = spectral_norm(sch.B)
    if sch.kind is SchemeKind.GSG:
        return BNorm(math.sqrt(sch.p + 1), exact)
    if sch.kind is SchemeKind.GCSG:
        return BNorm(math.sqrt(2.0), exact)
    k2 = sch.geometry.k**2
    return BNorm(math.sqrt(float(np.sum((1.0 - k2) ** 2) + np.max(k2**2 + 1.0))), exact)


def bound_inputs(sch: SchemeMatrices, f: ArrayLike | None = None, *, nu: float = 1.0,
                 C: float = 1.0, eps_star: float = MACHINE_EPS, f_M: float | None = None,
                 rank_rtol: float = DEFAULT_RANK_RTOL) -> BoundInputs:
    """Fill BoundInputs from a built scheme.

    ``f_M`` defaults to max |f| over the supplied function values, or 1 when
    neither is given.
    """
    if f_M is None:
        f_M = 1.0 if f is None else float(np.max(np.abs(np.asarray(f, dtype=float))))
    return BoundInputs(
        nu=nu, f_M=f_M, C=C, eps_star=eps_star, p=sch.p, q=sch.q,
        norm_A_dagger=sch.norm_A_dagger(rank_rtol),
        kappa_A=sch.kappa(rank_rtol),
        norm_B=scheme_B_norm(sch).value,
        norm_Lhat_dagger=sch.norm_Lhat_dagger(rank_rtol),
    )


def rough_inputs(kind: SchemeKind | str, p: int = 1, kappa_A: float = 1.0, *,
                 nu: float = 1.0, f_M: float = 1.0, C: float = 1.0,
                 eps_star: float = MACHINE_EPS, norm_Lhat_dagger: float = 1.0) -> BoundInputs:
    """Inputs for a scheme known only through p and kappa, at Delta = 1 with all k_i = 1.

    ||A^+|| follows from ||Lhat^+|| through A = L (GSG), A = 2 L+ (GCSG) and
    A = L+ D - L~ (GACSG, where Lhat^+ already denotes that matrix).
    """
    kind = SchemeKind.parse(kind)
    if kind is SchemeKind.GSG:
        return BoundInputs(nu=nu, f_M=f_M, C=C, eps_star=eps_star, p=p, q=p,
                           norm_A_dagger=norm_Lhat_dagger, kappa_A=kappa_A,
                           norm_B=math.sqrt(p + 1), norm_Lhat_dagger=norm_Lhat_dagger)
    scale = 0.5 if kind is SchemeKind.GCSG else 1.0
    return BoundInputs(nu=nu, f_M=f_M, C=C, eps_star=eps_star, p=p, q=2 * p,
                       norm_A_dagger=scale * norm_Lhat_dagger, kappa_A=kappa_A,
                       norm_B=math.sqrt(2.0), norm_Lhat_dagger=norm_Lhat_dagger)


def approx_bound(sch: SchemeMatrices, inp: BoundInputs, Delta: float | None = None,
                 curv: CurvatureData | None = None) -> float:
    """The approximation bound matching ``sch.kind`` at ``Delta`` (default: the scheme's own)."""
    Delta = sch.delta if Delta is None else Delta
    if sch.kind is SchemeKind.GSG:
        return gsg_approx_bound(inp, Delta)
    if sch.kind is SchemeKind.GCSG:
        return gcsg_approx_bound(inp, Delta)
    return gacsg_approx_bound(inp, sch.geometry, curv, Delta)


def fpe_bound(sch: SchemeMatrices, inp: BoundInputs, tight: bool = False) -> float:
    """Combined floating-point bound; the GSG-specific form when ``tight``."""
    if tight and sch.kind is SchemeKind.GSG:
        return gsg_tight_fpe_bound(inp)
    return combined_fpe_bound(inp)


# -- optimal diameter -------------------------------------------------------


def total_bound(bb: BoundBreakdown, Delta: float) -> float:
    """kappa_ae Delta^N_ae + kappa_fpe Delta^-N_fpe."""
    Delta = _positive_delta(Delta)
    return bb.kappa_ae * Delta**bb.N_ae + bb.kappa_fpe * Delta ** (-bb.N_fpe)


def delta_min(kappa_ae: float, N_ae: float, kappa_fpe: float, N_fpe: float) -> float:
    """Unique minimizer (N_fpe kappa_fpe / (N_ae kappa_ae))^(1/(N_ae + N_fpe)) of the total bound."""
    if not (kappa_ae > 0 and kappa_fpe > 0 and N_fpe > 0 and N_ae >= 1):
        raise InvalidInput(
            "need kappa_ae > 0, kappa_fpe > 0, N_ae >= 1 and N_fpe > 0; got "
            f"({kappa_ae}, {N_ae}, {kappa_fpe}, {N_fpe})"
        )
    return (N_fpe * kappa_fpe / (N_ae * kappa_ae)) ** (1.0 / (N_ae + N_fpe))


@dataclass(frozen=True)
class BoundBreakdown:
    """Coefficients of kappa_ae Delta^N_ae + kappa_fpe Delta^-N_fpe and derived diameters.

    ``delta_min`` minimizes the total bound. ``delta_balance`` is where the two
    terms are equal, (kappa_fpe / kappa_ae)^(1/(N_ae+N_fpe)); it coincides with
    ``delta_min`` when N_ae = N_fpe and is the quantity the published
    closed-form rough estimates evaluate.
    """

    kappa_ae: float
    N_ae: float
    kappa_fpe: float
    N_fpe: float
    kind: str | None = None
    regime: str | None = None
    kappa1_ae: float | None = None
    kappa2_ae: float | None = None

    @property
    def delta_min(self) -> float:
        return delta_min(self.kappa_ae, self.N_ae, self.kappa_fpe, self.N_fpe)

    @property
    def delta_balance(self) -> float:
        return (self.kappa_fpe / self.kappa_ae) ** (1.0 / (self.N_ae + self.N_fpe))

    def total(self, Delta: float) -> float:
        return total_bound(self, Delta)

    def to_dict(self) -> dict:
        out = {
            "kappa_ae": self.kappa_ae,
            "N_ae": self.N_ae,
            "kappa_fpe": self.kappa_fpe,
            "N_fpe": self.N_fpe,
            "delta_min": self.delta_min,
            "delta_balance": self.delta_balance,
        }
        extra = {k: v for k, v in asdict(self).items() if k not in out and v is not None}
        out.update(extra)
        return out


def gacsg_regime_advice(kappa1_ae: float, kappa2_ae: float, Delta_ref: float) -> str:
    """Advisory only: which term dominates the GACSG bound at ``Delta_ref``."""
    Delta_ref = _positive_delta(Delta_ref)
    return REGIMES[0] if kappa1_ae >= kappa2_ae * Delta_ref else REGIMES[1]


def breakdown(kind: SchemeKind | str, inp: BoundInputs, Delta: float = 1.0, *,
              tight: bool = False, regime: str | None = None,
              geo: GeometryReport | None = None,
              curv: CurvatureData | None = None) -> BoundBreakdown:
    """Assemble the Delta-free coefficients of the combined bound.

    ``inp.norm_A_dagger`` is taken at diameter ``Delta``; the floating-point
    coefficient uses Delta * ||A^+||, which does not depend on Delta when the
    directions are scaled together. For the GACSG the caller picks the regime:
    ``rotation-dominated`` uses 2 kappa1_ae with N_ae = 1, ``curvature-dominated``
    uses 2 kappa2_ae with N_ae = 2. Without ``geo`` all k_i = 1 and theta_i = 0
    are assumed.

    Raises:
        MissingRegime: GACSG without a regime.
        StabilityViolation: C eps kappa(A) >= 1.
    """
    kind = SchemeKind.parse(kind)
    Delta = _positive_delta(Delta)
    scaled = inp.with_(norm_A_dagger=inp.norm_A_dagger * Delta)
    if kind is SchemeKind.GSG:
        kappa_fpe = gsg_tight_fpe_bound(scaled) if tight else combined_fpe_bound(scaled)
        kappa_ae = inp.nu * math.sqrt(inp.p) / 2.0 * inp.norm_Lhat_dagger
        return BoundBreakdown(kappa_ae, 1, kappa_fpe, 1, kind=kind.value)
    kappa_fpe = combined_fpe_bound(scaled)
    if kind is SchemeKind.GCSG:
        kappa_ae = inp.nu * math.sqrt(inp.p) / 6.0 * inp.norm_Lhat_dagger
        return BoundBreakdown(kappa_ae, 2, kappa_fpe, 1, kind=kind.value)

    if regime is None:
        raise MissingRegime(f"GACSG needs a regime, one of {', '.join(REGIMES)}")
    if regime not in REGIMES:
        raise InvalidInput(f"unknown regime {regime!r}; expected one of {', '.join(REGIMES)}")
    if geo is None:
        geo = GeometryReport(k=np.ones(inp.p), theta=np.zeros(inp.p),
                             bases=np.empty((inp.p, 0, 0)), rotations=np.empty((inp.p, 0, 0)))
    c2 = _gacsg_c2(inp, geo)
    if curv is not None or not np.any(geo.theta > 0):
        c1 = _gacsg_terms(inp, geo, curv)[0]
    elif regime == REGIMES[0]:
        raise InvalidInput("the rotation-dominated regime needs curvature constants")
    else:
        c1 = None
    if regime == REGIMES[0]:
        kappa_ae, n_ae = 2.0 * c1, 1
    else:
        kappa_ae, n_ae = 2.0 * c2, 2
    if not kappa_ae > 0:
        raise InvalidInput(
            f"approximation coefficient vanishes in the {regime} regime; no finite optimal Delta"
        )
    return BoundBreakdown(kappa_ae, n_ae, kappa_fpe, 1, kind=kind.value, regime=regime,
                          kappa1_ae=c1, kappa2_ae=c2)


def scheme_delta_min(sch: SchemeMatrices, inp: BoundInputs, tight: bool = False,
                     regime: str | None = None,
                     curv: CurvatureData | None = None) -> BoundBreakdown:
    """Breakdown for a built scheme, using its own diameter and geometry."""
    return breakdown(sch.kind, inp, sch.delta, tight=tight, regime=regime,
                     geo=sch.geometry, curv=curv)
