"""Command-line front end: parse config, dispatch subcommands, emit CSV.

Exit codes: 0 success, 1 numeric or hypothesis failure (reports are
still written), 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, PhilapError
from .orlicz import gridfunction_to_csv
from .problems import builtin_example, load_problem, run_all_checks
from .solver import (
    two_solution_pipeline,
    write_convergence_csv,
    write_degiorgi_csv,
    write_solution_csv,
)
from .threshold import (
    classify,
    lambda_star,
    truncation_constants,
    write_kappa_csv,
    write_threshold_csv,
)
from .solver import build_subsolution
from .young import (
    PathologicalParams,
    build_pathological,
    compute_indices,
    log_grid,
    log_power_young,
    power_young,
    sobolev_conjugate,
    young_conjugate,
)

TOLERANCES = {
    "tolerance_version": "1",
    "root_find_iters": "90",
    "luxemburg_iters": "70",
    "index_grid": "2000pts@[1e-4,1e6]",
    "torsion_tol": "1e-8",
    "first_solution_tol": "1e-6",
    "mountain_pass_tol": "1e-4",
    "hf2_slack": "1e-8",
    "hf3_slack": "1e-6",
}


def _write_manifest(out: Path, config_text: str, seed: int, extra=None) -> None:
    digest = hashlib.sha256(config_text.encode()).hexdigest()
    lines = [f"version={__version__}", f"config_sha256={digest}", f"seed={seed}"]
    lines += [f"{k}={v}" for k, v in TOLERANCES.items()]
    lines += [f"{k}={v}" for k, v in (extra or {}).items()]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _builtin_generator(args):
    kind = args.builtin
    if kind == "power":
        return power_young(args.p)
    if kind == "log-power":
        return log_power_young(args.p)
    if kind == "pathological":
        return build_pathological(PathologicalParams.make(args.p, args.q, args.eps))
    raise ConfigError(f"unknown builtin generator {args.builtin!r}")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_indices(args) -> int:
    import csv

    psi = _builtin_generator(args)
    grid = log_grid(args.grid_lo, min(args.grid_hi, psi.t_hi * 0.999), args.grid_n)
    pair = compute_indices(psi, grid)
    out = _outdir(args)
    with open(out / "indices.csv", "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["function", "lower", "upper",
                         "at_infinity_lower", "at_infinity_upper"])
        writer.writerow([psi.name, f"{pair.lower:.12g}", f"{pair.upper:.12g}",
                         f"{pair.at_infinity_lower:.12g}",
                         f"{pair.at_infinity_upper:.12g}"])
    _write_manifest(out, f"indices:{psi.name}:{args.grid_lo}:{args.grid_hi}:{args.grid_n}",
                    seed=0)
    print(f"indices of {psi.name}: lower={pair.lower:.6g} upper={pair.upper:.6g}")
    return 0


def _cmd_conjugate(args) -> int:
    psi = _builtin_generator(args)
    conj = young_conjugate(psi)
    back = young_conjugate(conj)
    ts = log_grid(1e-3, 1e3, 100)
    out = _outdir(args)
    with open(out / "conjugate.csv", "w", newline="\n") as fh:
        fh.write("t,value,conjugate,involution_rel_err\n")
        for t in ts:
            v = psi(t)
            err = abs(back(t) - v) / v
            fh.write(f"{t:.12g},{v:.12g},{conj(t):.12g},{err:.12g}\n")
    _write_manifest(out, f"conjugate:{psi.name}", seed=0)
    print(f"conjugate of {psi.name} written; worst involution error on [1e-3,1e3] "
          f"= {max(abs(back(t) - psi(t)) / psi(t) for t in ts):.3e}")
    return 0


def _cmd_sobolev_conjugate(args) -> int:
    psi = _builtin_generator(args)
    star = sobolev_conjugate(psi, args.N)
    pair = compute_indices(star)
    lo = star.t_lo * 1.01
    hi = star.t_hi * 0.99
    ts = log_grid(lo, hi, 200)
    out = _outdir(args)
    with open(out / "sobolev_conjugate.csv", "w", newline="\n") as fh:
        fh.write("t,phi_star\n")
        for t in ts:
            fh.write(f"{t:.12g},{star(t):.12g}\n")
    _write_manifest(out, f"sobolev:{psi.name}:N={args.N}", seed=0)
    print(f"critical conjugate of {psi.name} (N={args.N}): "
          f"indices [{pair.lower:.4g}, {pair.upper:.4g}]")
    return 0


def _load_from_args(args):
    if not args.config:
        raise ConfigError("this command requires --config")
    return load_problem(args.config, overrides=args.override)


def _cmd_check(args) -> int:
    spec, settings, text = _load_from_args(args)
    report = run_all_checks(spec, t_max=settings.t_max)
    out = _outdir(args)
    report.to_csv(out / "hypotheses.csv")
    _write_manifest(out, text, settings.seed)
    for line in report.lines():
        print(line)
    return 0 if report.all_passed else 1


def _cmd_lambda_star(args) -> int:
    spec, settings, text = _load_from_args(args)
    report = run_all_checks(spec, t_max=settings.t_max)
    out = _outdir(args)
    report.to_csv(out / "hypotheses.csv")
    if not report.all_passed:
        for line in report.lines():
            print(line)
        _write_manifest(out, text, settings.seed)
        return 1
    sub = build_subsolution(spec, report.hf1.data["delta"], lam=1.0)
    constants = truncation_constants(spec, sub.k1, sub.k2)
    case = classify(spec.upsilon, spec.phi)
    rng = np.random.default_rng(settings.seed)
    thr = lambda_star(spec, constants, case, rng=rng,
                      embed_trials=settings.embed_trials)
    lam = settings.lam
    if lam is None:
        lam = thr.lambda_star / 2.0 if math.isfinite(thr.lambda_star) else 1.0
    adm = thr.r_star(lam)
    write_threshold_csv(thr, [lam], out / "threshold.csv")
    r_grid = np.geomspace(adm.r_star / 100.0, adm.r_star * 100.0, 200)
    write_kappa_csv(thr, r_grid, out / "kappa_curve.csv", lam=lam)
    _write_manifest(out, text, settings.seed,
                    extra={"case": thr.case.value,
                           "lambda_star": f"{thr.lambda_star:.12g}"})
    print(f"case={thr.case.value} lambda_star={thr.lambda_star:.6g} "
          f"r_star({lam:.6g})={adm.r_star:.6g}")
    return 0


def _run_pipeline(args, need_mountain: bool):
    spec, settings, text = _load_from_args(args)
    out = _outdir(args)
    report = run_all_checks(spec, t_max=settings.t_max)
    report.to_csv(out / "hypotheses.csv")
    if not report.all_passed:
        for line in report.lines():
            print(line)
        _write_manifest(out, text, settings.seed)
        return None, 1
    result = two_solution_pipeline(
        spec, lam=settings.lam, tol_first=settings.tol_first,
        tol_mountain=settings.tol_mountain, n_path=settings.n_path,
        max_iter=settings.max_iter, embed_trials=settings.embed_trials,
        t_max=settings.t_max, rng=np.random.default_rng(settings.seed))
    write_solution_csv(out / "solution.csv", spec.grid, {
        "u_lambda": result.first.u.values,
        "v_lambda": result.mp.state.u.values,
        "u_under": result.sub.u_under.values,
    })
    write_convergence_csv(out / "convergence.csv", result.first_trace)
    write_threshold_csv(result.threshold, [result.lam], out / "threshold.csv")
    write_degiorgi_csv(out / "degiorgi.csv", result.degiorgi)
    gridfunction_to_csv(result.sub.u_under, out / "subsolution.csv")
    _write_manifest(out, text, settings.seed, extra={
        "lambda": f"{result.lam:.12g}",
        "lambda_star": f"{result.threshold.lambda_star:.12g}",
        "first_residual": f"{result.verify_first.max_residual:.12g}",
        "mountain_residual": f"{result.verify_second.max_residual:.12g}",
    })
    code = 0
    print(f"lambda={result.lam:.6g} first residual={result.verify_first.max_residual:.3e} "
          f"J={result.first.J_value:.6g}")
    if need_mountain:
        mp = result.mp
        print(f"mountain pass: level={mp.level:.6g} residual={mp.residual:.3e} "
              f"converged={mp.converged} collapsed={mp.collapsed}")
        if not mp.converged:
            code = 1
    return result, code


def _cmd_solve(args) -> int:
    _, code = _run_pipeline(args, need_mountain=False)
    return code


def _cmd_mountain_pass(args) -> int:
    _, code = _run_pipeline(args, need_mountain=True)
    return code


def _cmd_degiorgi(args) -> int:
    result, code = _run_pipeline(args, need_mountain=False)
    if result is None:
        return code
    dg = result.degiorgi
    print(f"sup bound M={dg.M:.6g} with {len(dg.levels)} levels, "
          f"final mass {dg.masses[-1]:.3g}")
    return code


def _cmd_verify_example(args) -> int:
    spec = builtin_example(args.name, p=args.p, N=args.N, r=args.r,
                           gamma=args.gamma, q=args.q, eps=args.eps)
    report = run_all_checks(spec)
    out = _outdir(args)
    report.to_csv(out / "hypotheses.csv")
    _write_manifest(out, f"verify-example:{spec.name}", spec.seed)
    for line in report.lines():
        print(line)
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="philap",
        description="Numerical laboratory for singular quasilinear problems "
                    "in Orlicz-Sobolev settings (1D grids)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default="philap-out", help="output directory")

    def add_builtin(p):
        p.add_argument("--builtin", required=True,
                       choices=["power", "log-power", "pathological"])
        p.add_argument("--p", type=float, default=3.0)
        p.add_argument("--q", type=float, default=2.0)
        p.add_argument("--eps", type=float, default=1.9)

    p = sub.add_parser("indices", help="growth indices of a built-in generator")
    add_builtin(p)
    p.add_argument("--grid-lo", type=float, default=1e-4)
    p.add_argument("--grid-hi", type=float, default=1e6)
    p.add_argument("--grid-n", type=int, default=2000)
    add_common(p)
    p.set_defaults(func=_cmd_indices)

    p = sub.add_parser("conjugate", help="Young conjugate table and involution check")
    add_builtin(p)
    add_common(p)
    p.set_defaults(func=_cmd_conjugate)

    p = sub.add_parser("sobolev-conjugate", help="critical-growth conjugate table")
    add_builtin(p)
    p.add_argument("--N", type=int, default=4)
    add_common(p)
    p.set_defaults(func=_cmd_sobolev_conjugate)

    def add_config(p):
        p.add_argument("--config", help="problem configuration file (INI)")
        p.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE")
        add_common(p)

    p = sub.add_parser("check", help="audit the structural hypotheses")
    add_config(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("lambda-star", help="threshold and admissible radius")
    add_config(p)
    p.set_defaults(func=_cmd_lambda_star)

    p = sub.add_parser("solve", help="constrained first solution")
    add_config(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("mountain-pass", help="two-solution pipeline")
    add_config(p)
    p.set_defaults(func=_cmd_mountain_pass)

    p = sub.add_parser("degiorgi", help="sup-bound diagnostic on the first solution")
    add_config(p)
    p.set_defaults(func=_cmd_degiorgi)

    p = sub.add_parser("verify-example", help="audit a built-in example problem")
    p.add_argument("name", choices=["A5", "A4", "pathological-reaction"])
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--r", type=float, default=3.5)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=1.9)
    add_common(p)
    p.set_defaults(func=_cmd_verify_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PhilapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
