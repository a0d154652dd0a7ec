"""Command-line entry point.

Exit codes: 0 ok, 1 bad arguments or input, 2 sample set not poised,
3 stability condition C*eps*kappa < 1 violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import harness
from .errors import NotPoised, SimplexGradError, StabilityViolation
from .geometry import GeometryReport
from .linalg import DEFAULT_RANK_RTOL
from .oracle import NoiseMode, NoiseModel, builtin_registry, fvalues_for, lookup, quadratic
from .schemes import SchemeKind, build, evaluate, project

EXIT_OK, EXIT_PARSE, EXIT_NOT_POISED, EXIT_STABILITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _common(defaults: bool) -> argparse.ArgumentParser:
    """Shared flags; subcommands only override what is given after them."""
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--out", type=Path, default=d(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default=d(None))
    p.add_argument("--rank-rtol", type=float, default=d(DEFAULT_RANK_RTOL))
    p.add_argument("--C", type=float, default=d(1.0), help="pseudo-inverse stability constant")
    p.add_argument("--nu", type=float, default=d(None), help="Lipschitz constant override")
    p.add_argument("--eps-star", type=float, default=d(None),
                   help="precision used in the floating-point bounds")
    p.add_argument("--noise-level", type=float, default=d(0.0))
    p.add_argument("--noise-mode", choices=[m.value for m in NoiseMode], default=d(None))
    p.add_argument("--additive-noise", action="store_true", default=d(False))
    p.add_argument("--regime", choices=list(bnd.REGIMES), default=d(None))
    p.add_argument("--tight", action="store_true", default=d(False),
                   help="GSG-specific floating-point bound")
    return p


def _function_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--function", help="builtin test function name")
    p.add_argument("--quad", help='custom quadratic as JSON {"H": [[...]], "b": [...], "c": 0}')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simplexgrad", parents=[_common(True)],
                     description="Generalized simplex gradients and their error bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(False)

    g = sub.add_parser("grad", parents=[common], help="estimate a gradient from a sample-set CSV")
    g.add_argument("--scheme", required=True)
    g.add_argument("--points", type=Path, required=True, help="sample-set CSV")
    g.add_argument("--fvalues", type=Path, help="function values CSV in scheme point order")
    _function_args(g)

    s = sub.add_parser("sweep", parents=[common], help="observed error and bounds over a Delta grid")
    s.add_argument("--scheme", required=True)
    _function_args(s)
    s.add_argument("--template", type=Path, help="sample-set CSV giving y0 and the directions")
    s.add_argument("--y0", help="comma-separated reference point (default: origin)")
    s.add_argument("--dirs", help="directions as rows 'a,b;c,d' (default: coordinate axes)")
    s.add_argument("--tilde-dirs", help="GACSG reflected directions, same layout as --dirs")
    s.add_argument("--dim", type=int, help="dimension when neither --y0 nor a template is given")
    s.add_argument("--delta-lo", type=float, default=1e-4)
    s.add_argument("--delta-hi", type=float, default=1e-1)
    s.add_argument("--per-decade", type=int, default=5)

    dm = sub.add_parser("delta-min", parents=[common], help="optimal diameter from bound coefficients")
    dm.add_argument("--scheme", required=True)
    dm.add_argument("--points", type=Path, help="derive inputs from this sample set")
    dm.add_argument("--fvalues", type=Path)
    _function_args(dm)
    dm.add_argument("--p", type=int, default=1)
    dm.add_argument("--kappa", type=float, default=1.0)
    dm.add_argument("--f-M", type=float, default=None)
    dm.add_argument("--norm-Lhat-dagger", type=float, default=1.0)
    dm.add_argument("--theta", type=float, default=0.0, help="largest rotation angle (GACSG)")
    dm.add_argument("--K1", type=float, default=0.0)
    dm.add_argument("--K2", type=float, default=0.0)
    dm.add_argument("--delta-ref", type=float, help="reference Delta for the regime advisory")

    dp = sub.add_parser("demo-pinv", parents=[common], help="inverse error of an ill-conditioned 2x2")
    dp.add_argument("--thetas", help="comma-separated angles",
                    default=",".join(repr(t) for t in harness.DEMO_THETAS))

    b = sub.add_parser("bounds", parents=[common], help="every bound for one sample set")
    b.add_argument("--scheme", required=True)
    b.add_argument("--points", type=Path, required=True)
    b.add_argument("--fvalues", type=Path)
    _function_args(b)

    sub.add_parser("list-functions", parents=[common], help="builtin test functions")
    return parser


# -- helpers ----------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}: {exc}") from None


def _rows(text: str) -> np.ndarray:
    rows = [_floats(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"bad direction list {text!r}")
    return np.array(rows)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _noise(args) -> NoiseModel:
    mode = args.noise_mode
    if mode is None:
        mode = NoiseMode.UNIFORM_RANDOM if args.noise_level > 0 else NoiseMode.OFF
    return NoiseModel(level=args.noise_level, mode=mode, seed=args.seed, additive=args.additive_noise)


def _eps(args, noise: NoiseModel) -> float:
    if args.eps_star is not None:
        return args.eps_star
    if noise.mode is not NoiseMode.OFF and noise.level > 0:
        return noise.level
    return bnd.MACHINE_EPS


def _test_function(args, n: int | None = None, center=None, radius=None):
    if args.quad:
        try:
            given = json.loads(args.quad)
            return quadratic(given["H"], given.get("b"), given.get("c", 0.0))
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad --quad value: {exc}") from None
    if args.function:
        return lookup(args.function, dim=n, center=center, radius=radius)
    return None


def _sample_and_values(args):
    """Scheme, function values and test function (if any) for grad/bounds/delta-min."""
    kind = SchemeKind.parse(args.scheme)
    sample = harness.sample_from_points(kind, harness.read_points_csv(_read(args.points)))
    sch = build(kind, sample, args.rank_rtol)
    noise = _noise(args)
    radius = float(np.max(np.linalg.norm(sch.points - sch.y0, axis=1)))
    tf = _test_function(args, sch.n, sch.y0, radius)
    if args.fvalues is not None:
        f = harness.read_fvalues_csv(_read(args.fvalues))
    elif tf is not None:
        f = fvalues_for(sch, tf, noise)
    else:
        raise UsageError("give --fvalues or a test function (--function / --quad)")
    return sch, f, tf, noise


def _nu(args, sch, tf) -> float:
    if args.nu is not None:
        return args.nu
    if tf is None:
        raise UsageError("--nu is required without a test function")
    return tf.nu_grad if sch.kind is SchemeKind.GSG else tf.nu_hess


def _curv(sch, tf):
    if sch.kind is not SchemeKind.GACSG or tf is None:
        return None
    return bnd.curvature_constants(tf.hessian(sch.y0), sch.geometry.bases)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _table_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([harness.fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit(args, text: str, meta: dict | None = None) -> None:
    if args.out is None:
        sys.stdout.write(text)
        if meta is not None:
            print(f"# seed={meta['seed']}", file=sys.stderr)
        return
    args.out.write_text(text)
    if meta is not None:
        Path(str(args.out) + ".meta.json").write_text(_dump_json(meta))


# -- commands ---------------------------------------------------------------


def cmd_grad(args) -> str:
    sch, f, tf, _ = _sample_and_values(args)
    est = evaluate(sch, f, args.rank_rtol)
    out = {
        "estimate": est.tolist(),
        "projected_estimate": project(sch, est, args.rank_rtol).tolist(),
        "scheme_summary": {**sch.to_dict(), "delta": sch.delta, "kappa": sch.kappa(args.rank_rtol),
                           "sigma_ratio": sch.sigma_ratio},
        "seed": args.seed,
    }
    if tf is not None:
        g = tf.gradient(sch.y0)
        out["true_gradient"] = g.tolist()
        out["projected_error"] = float(np.linalg.norm(project(sch, g - est, args.rank_rtol)))
    if (args.format or "json") == "csv":
        rows = [[i, float(e), float(pe)] for i, (e, pe) in
                enumerate(zip(out["estimate"], out["projected_estimate"]))]
        return _table_csv(["component", "estimate", "projected_estimate"], rows)
    return _dump_json(out)


def cmd_bounds(args) -> str:
    sch, f, tf, noise = _sample_and_values(args)
    nu = _nu(args, sch, tf)
    inp = bnd.bound_inputs(sch, f, nu=nu, C=args.C, eps_star=_eps(args, noise), rank_rtol=args.rank_rtol)
    curv = _curv(sch, tf)
    bnorm = bnd.scheme_B_norm(sch)
    out = {
        "scheme": sch.kind.value,
        "delta": sch.delta,
        "inputs": {k: getattr(inp, k) for k in inp.__dataclass_fields__},
        "norm_B_exact": bnorm.exact,
        "approx_bound": bnd.approx_bound(sch, inp, curv=curv),
        "pinv_fpe_bound": bnd.pinv_fpe_bound(inp),
        "feval_fpe_bound": bnd.feval_fpe_bound(inp),
        "combined_fpe_bound": bnd.combined_fpe_bound(inp),
        "seed": args.seed,
    }
    if sch.kind is SchemeKind.GSG:
        out["gsg_tight_fpe_bound"] = bnd.gsg_tight_fpe_bound(inp)
    if sch.kind is SchemeKind.GACSG:
        geo = sch.geometry
        out["geometry"] = {"k": geo.k.tolist(), "theta": geo.theta.tolist(), "Theta": geo.Theta}
        if curv is not None:
            out["curvature"] = {"K1": curv.K1, "K2": curv.K2}
    if (args.format or "json") == "csv":
        flat = [[k, float(v)] for k, v in out.items() if isinstance(v, (int, float)) and k != "seed"]
        return _table_csv(["quantity", "value"], flat)
    return _dump_json(out)


def cmd_delta_min(args) -> str:
    kind = SchemeKind.parse(args.scheme)
    if kind is SchemeKind.GACSG and args.regime is None:
        # checked before any input work so the error is about the missing choice
        bnd.breakdown(kind, bnd.BoundInputs(), regime=None)
    if args.points is not None:
        sch, f, tf, noise = _sample_and_values(args)
        inp = bnd.bound_inputs(sch, f, nu=_nu(args, sch, tf), C=args.C, f_M=args.f_M,
                               eps_star=_eps(args, noise), rank_rtol=args.rank_rtol)
        bb = bnd.scheme_delta_min(sch, inp, tight=args.tight, regime=args.regime,
                                  curv=_curv(sch, tf))
        source = "sample-set"
    else:
        nu = 1.0 if args.nu is None else args.nu
        inp = bnd.rough_inputs(kind, args.p, args.kappa, nu=nu,
                               f_M=1.0 if args.f_M is None else args.f_M, C=args.C,
                               eps_star=_eps(args, _noise(args)),
                               norm_Lhat_dagger=args.norm_Lhat_dagger)
        geo = curv = None
        if kind is SchemeKind.GACSG:
            geo = GeometryReport(k=np.ones(args.p), theta=np.full(args.p, args.theta),
                                 bases=np.empty((args.p, 0, 0)), rotations=np.empty((args.p, 0, 0)))
            curv = bnd.CurvatureData(H=np.zeros((0, 0)), kappa1=np.array([args.K1]),
                                     kappa2=np.array([args.K2]))
        bb = bnd.breakdown(kind, inp, tight=args.tight, regime=args.regime, geo=geo, curv=curv)
        source = "scalar"
    out = {**bb.to_dict(), "source": source, "seed": args.seed}
    if kind is SchemeKind.GACSG and args.delta_ref is not None and bb.kappa1_ae is not None:
        out["regime_advice"] = bnd.gacsg_regime_advice(bb.kappa1_ae, bb.kappa2_ae, args.delta_ref)
    if (args.format or "json") == "csv":
        flat = [[k, float(v)] for k, v in out.items()
                if isinstance(v, (int, float)) and not isinstance(v, bool) and k != "seed"]
        return _table_csv(["quantity", "value"], flat)
    return _dump_json(out)


def cmd_demo_pinv(args) -> str:
    rows = harness.demo_pinv(_floats(args.thetas), args.rank_rtol)
    if (args.format or "csv") == "json":
        return _dump_json({"rows": rows, "seed": args.seed})
    return _table_csv(["theta", "kappa", "error"],
                      [[r["theta"], r["kappa"], r["error"]] for r in rows])


def _sweep_config(args) -> harness.SweepConfig:
    kind = SchemeKind.parse(args.scheme)
    tilde = None
    if args.template is not None:
        sample = harness.sample_from_points(kind, harness.read_points_csv(_read(args.template)))
        if hasattr(sample, "plus"):
            y0, dirs, tilde = sample.plus.y0, sample.plus.dirs, sample.tilde_dirs
        else:
            y0, dirs = sample.y0, sample.dirs
    else:
        if args.y0 is not None:
            y0 = np.array(_floats(args.y0))
        else:
            y0 = np.zeros(args.dim or (1 if args.function == "cubic1d" else 2))
        dirs = _rows(args.dirs) if args.dirs else np.eye(y0.size)
        if args.tilde_dirs:
            tilde = _rows(args.tilde_dirs)
    function = args.function
    if args.quad:
        function = _test_function(args)
    if function is None:
        raise UsageError("sweep needs --function or --quad")
    return harness.SweepConfig(
        scheme=kind, function=function, y0=y0, dirs=dirs, tilde_dirs=tilde,
        delta_lo=args.delta_lo, delta_hi=args.delta_hi, per_decade=args.per_decade,
        noise=_noise(args), nu=args.nu, C=args.C, eps_star=args.eps_star,
        tight=args.tight, regime=args.regime, rank_rtol=args.rank_rtol,
    )


def cmd_sweep(args) -> tuple[str, dict]:
    cfg = _sweep_config(args)
    res = harness.run_sweep(cfg)
    meta = {
        "seed": cfg.seed,
        "scheme": cfg.scheme.value,
        "function": cfg.test_function().name,
        "noise_level": cfg.noise.level,
        "noise_mode": cfg.noise.mode.value,
        "eps_star": cfg.effective_eps(),
        "breakdown": None if res.breakdown is None else res.breakdown.to_dict(),
    }
    if (args.format or "csv") == "json":
        rows = [{k: getattr(r, k) for k in harness.SWEEP_HEADER} | ({"error": r.error} if r.error else {})
                for r in res.rows]
        return _dump_json({**meta, "rows": rows}), None
    return res.to_csv(), meta


def cmd_list_functions(args) -> str:
    funcs = [tf.summary() for tf in builtin_registry()]
    if (args.format or "json") == "csv":
        return _table_csv(["name", "dim", "nu_grad", "nu_hess", "radius"],
                          [[f["name"], f["dim"], f["nu_grad"], f["nu_hess"], f["radius"]] for f in funcs])
    return _dump_json({"functions": funcs, "seed": args.seed})


COMMANDS = {
    "grad": cmd_grad,
    "bounds": cmd_bounds,
    "delta-min": cmd_delta_min,
    "demo-pinv": cmd_demo_pinv,
    "sweep": cmd_sweep,
    "list-functions": cmd_list_functions,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
        text, meta = result if isinstance(result, tuple) else (result, None)
        _emit(args, text, meta)
    except NotPoised as exc:
        print(f"error: not poised: {exc}", file=sys.stderr)
        return EXIT_NOT_POISED
    except StabilityViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except (SimplexGradError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
