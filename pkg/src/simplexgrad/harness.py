"""Experiment plumbing: sample-set CSV files, Delta sweeps and the ill-conditioned inverse demo."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import bounds as bnd
from .errors import InvalidInput, SimplexGradError
from .geometry import AdaptedPair, SampleSet
from .linalg import DEFAULT_RANK_RTOL, pinv
from .oracle import NoiseMode, NoiseModel, TestFunction, fvalues_for, lookup
from .schemes import SchemeKind, SchemeMatrices, build, evaluate, project

SWEEP_HEADER = ["delta", "observed_error", "approx_bound", "fpe_bound", "total_bound", "delta_min"]
DEMO_THETAS = (1e-1, 1e-4, 1e-7, 1e-10, 1e-13, 1e-16)

# tolerance for recognizing the optional reflected half of a GCSG file
_REFLECTION_RTOL = 1e-12


def fmt(x: float) -> str:
    return f"{x:.17g}"


# -- sample-set files -------------------------------------------------------


def read_points_csv(text: str) -> NDArray[np.float64]:
    """Rows of a ``x1,...,xn`` CSV as an array; the header row is required."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InvalidInput("sample-set CSV needs a header and at least one row")
    header = [h.strip() for h in rows[0]]
    n = len(header)
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        raise InvalidInput(f"non-numeric entry in sample-set CSV: {exc}") from None
    if data.shape[1] != n:
        raise InvalidInput(f"rows have {data.shape[1]} columns but the header has {n}")
    if not np.all(np.isfinite(data)):
        raise InvalidInput("sample-set CSV has non-finite entries")
    return data


def sample_from_points(kind: SchemeKind | str, data: ArrayLike) -> SampleSet | AdaptedPair:
    """Interpret CSV rows for a scheme.

    Row 1 is y0 and the following rows are plus points. For the GACSG the last
    half of the remaining rows are the reflected points and are mandatory; for
    the GCSG they are optional and recognized when they are the exact
    reflection of the first half.
    """
    kind = SchemeKind.parse(kind)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    y0, rest = data[0], data[1:]
    m = rest.shape[0]
    if m < 1:
        raise InvalidInput("need at least one sample point besides y0")
    if kind is SchemeKind.GACSG:
        if m % 2:
            raise InvalidInput("GACSG needs p plus points followed by p reflected points")
        p = m // 2
        return AdaptedPair(SampleSet(y0, rest[:p] - y0), y0 - rest[p:])
    if kind is SchemeKind.GCSG and m % 2 == 0:
        p = m // 2
        plus, minus = rest[:p] - y0, y0 - rest[p:]
        scale = max(np.abs(plus).max(), 1e-300)
        if np.allclose(plus, minus, rtol=0, atol=_REFLECTION_RTOL * scale):
            return SampleSet(y0, plus)
    return SampleSet(y0, rest - y0)


def write_points_csv(points: ArrayLike) -> str:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(pts.shape[1])])
    for row in pts:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_fvalues_csv(text: str) -> NDArray[np.float64]:
    """Single column of function values, optional non-numeric header."""
    vals = []
    for i, r in enumerate(csv.reader(io.StringIO(text))):
        if not r or not r[0].strip():
            continue
        try:
            vals.append(float(r[0]))
        except ValueError:
            if i == 0:
                continue
            raise InvalidInput(f"non-numeric function value {r[0]!r}") from None
    return np.array(vals)


# -- sweeps -----------------------------------------------------------------


@dataclass
class SweepConfig:
    """A Delta sweep over scaled copies of a direction template.

    Each template direction is normalized to unit length and then scaled by
    Delta, so every sample set in the sweep has diameter Delta and the same
    normalized geometry. GACSG reflected directions keep their ratio to the
    matching plus direction.
    """

    scheme: SchemeKind
    function: str | TestFunction
    y0: NDArray[np.float64]
    dirs: NDArray[np.float64]
    tilde_dirs: NDArray[np.float64] | None = None
    delta_lo: float = 1e-4
    delta_hi: float = 1e-1
    per_decade: int = 5
    noise: NoiseModel = field(default_factory=NoiseModel)
    nu: float | None = None
    C: float = 1.0
    eps_star: float | None = None
    tight: bool = False
    regime: str | None = None
    rank_rtol: float = DEFAULT_RANK_RTOL

    def __post_init__(self):
        self.scheme = SchemeKind.parse(self.scheme)
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        self.dirs = np.asarray(self.dirs, dtype=float).reshape(-1, self.y0.size)
        norms = np.linalg.norm(self.dirs, axis=1)
        if np.any(norms == 0):
            raise InvalidInput("template directions must be nonzero")
        if self.tilde_dirs is not None:
            self.tilde_dirs = np.asarray(self.tilde_dirs, dtype=float).reshape(self.dirs.shape)
            self.tilde_dirs = self.tilde_dirs / norms[:, None]
        elif self.scheme is SchemeKind.GACSG:
            self.tilde_dirs = self.dirs / norms[:, None]
        self.dirs = self.dirs / norms[:, None]
        if not (0 < self.delta_lo <= self.delta_hi) or self.per_decade < 1:
            raise InvalidInput("need 0 < delta_lo <= delta_hi and per_decade >= 1")

    @property
    def seed(self) -> int:
        return self.noise.seed

    def grid(self) -> NDArray[np.float64]:
        decades = math.log10(self.delta_hi / self.delta_lo)
        count = int(round(decades * self.per_decade)) + 1
        return np.logspace(math.log10(self.delta_lo), math.log10(self.delta_hi), count)

    def sample(self, delta: float) -> SampleSet | AdaptedPair:
        s = SampleSet(self.y0, delta * self.dirs)
        if self.scheme is SchemeKind.GACSG:
            return AdaptedPair(s, delta * self.tilde_dirs)
        return s

    def test_function(self) -> TestFunction:
        if isinstance(self.function, TestFunction):
            return self.function
        stretch = 1.0
        if self.tilde_dirs is not None:
            stretch = max(1.0, float(np.max(np.linalg.norm(self.tilde_dirs, axis=1))))
        return lookup(self.function, dim=self.y0.size, center=self.y0,
                      radius=self.delta_hi * stretch)

    def effective_eps(self) -> float:
        if self.eps_star is not None:
            return self.eps_star
        if self.noise.mode is not NoiseMode.OFF and self.noise.level > 0:
            return self.noise.level
        return bnd.MACHINE_EPS


@dataclass
class SweepRow:
    delta: float
    observed_error: float = math.nan
    approx_bound: float = math.nan
    fpe_bound: float = math.nan
    total_bound: float = math.nan
    delta_min: float = math.nan
    error: str | None = None

    def values(self) -> list[float]:
        return [getattr(self, k) for k in SWEEP_HEADER]


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    breakdown: bnd.BoundBreakdown | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        failed = any(r.error for r in self.rows)
        w.writerow(SWEEP_HEADER + (["error"] if failed else []))
        for r in self.rows:
            cells = [fmt(v) for v in r.values()]
            if failed:
                cells.append(r.error or "")
            w.writerow(cells)
        return buf.getvalue()

    def column(self, name: str) -> NDArray[np.float64]:
        return np.array([getattr(r, name) for r in self.rows])


def _nu_for(cfg: SweepConfig, tf: TestFunction) -> float:
    if cfg.nu is not None:
        return cfg.nu
    return tf.nu_grad if cfg.scheme is SchemeKind.GSG else tf.nu_hess


def _curvature(sch: SchemeMatrices, tf: TestFunction) -> bnd.CurvatureData | None:
    if sch.kind is not SchemeKind.GACSG:
        return None
    return bnd.curvature_constants(tf.hessian(sch.y0), sch.geometry.bases)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Observed projected error and the bounds at every Delta of the grid.

    ``delta_min`` comes from the bound coefficients of the largest sample set
    (f_M taken there) and is the same on every row. A failure at one Delta is
    recorded on its row and the sweep continues.
    """
    tf = cfg.test_function()
    nu = _nu_for(cfg, tf)
    eps = cfg.effective_eps()
    grad_true = tf.gradient(cfg.y0)
    off = NoiseModel()

    bb = None
    dmin = math.nan
    try:
        ref = build(cfg.scheme, cfg.sample(cfg.delta_hi), cfg.rank_rtol)
        f_ref = fvalues_for(ref, tf, off)
        inp_ref = bnd.bound_inputs(ref, f_ref, nu=nu, C=cfg.C, eps_star=eps, rank_rtol=cfg.rank_rtol)
        bb = bnd.scheme_delta_min(ref, inp_ref, tight=cfg.tight, regime=cfg.regime,
                                  curv=_curvature(ref, tf))
        dmin = bb.delta_min
    except SimplexGradError:
        if cfg.scheme is SchemeKind.GACSG and cfg.regime is None:
            bb = None
        else:
            raise

    rows = []
    for delta in cfg.grid():
        row = SweepRow(delta=float(delta), delta_min=dmin)
        try:
            sch = build(cfg.scheme, cfg.sample(delta), cfg.rank_rtol)
            f_exact = fvalues_for(sch, tf, off)
            f_obs = fvalues_for(sch, tf, cfg.noise)
            est = evaluate(sch, f_obs, cfg.rank_rtol)
            row.observed_error = float(np.linalg.norm(project(sch, grad_true - est, cfg.rank_rtol)))
            inp = bnd.bound_inputs(sch, f_exact, nu=nu, C=cfg.C, eps_star=eps, rank_rtol=cfg.rank_rtol)
            row.approx_bound = bnd.approx_bound(sch, inp, curv=_curvature(sch, tf))
            row.fpe_bound = bnd.fpe_bound(sch, inp, tight=cfg.tight)
            row.total_bound = row.approx_bound + row.fpe_bound
        except SimplexGradError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return SweepResult(cfg, rows, bb)


def empirical_argmin(result: SweepResult) -> float:
    err = result.column("observed_error")
    return float(result.column("delta")[int(np.nanargmin(err))])


def loglog_slope(x: ArrayLike, y: ArrayLike) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


# -- ill-conditioned inverse demo -------------------------------------------


def demo_matrix(theta: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """10 [[1, -cos t], [0, sin t]] and its closed-form inverse."""
    c, s = math.cos(theta), math.sin(theta)
    A = 10.0 * np.array([[1.0, -c], [0.0, s]])
    inv = 0.1 * np.array([[1.0, c / s], [0.0, 1.0 / s]])
    return A, inv


def demo_pinv(thetas=DEMO_THETAS, rank_rtol: float = DEFAULT_RANK_RTOL) -> list[dict]:
    """Spectral-norm error of the computed pseudo-inverse against the closed form."""
    out = []
    for theta in thetas:
        if not 0 < theta <= math.pi / 2:
            raise InvalidInput(f"theta must lie in (0, pi/2], got {theta}")
        A, inv = demo_matrix(theta)
        res = pinv(A, rank_rtol)
        s = res.singular_values
        out.append({
            "theta": float(theta),
            "kappa": float(s[0] / s[-1]),
            "error": float(np.linalg.norm(inv - res.pinv, 2)),
            "rank": res.numerical_rank,
        })
    return out
