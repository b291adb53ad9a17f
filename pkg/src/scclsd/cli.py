"""Command-line front end.

Exit codes: 0 success, 1 configuration/validation failure, 2 numerical
failure (non-convergence, rank deficiency, identity mismatch).  Errors are
reported on stderr as a single line ``error: <CODE>: <message>``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_from_dict, read_document
from .errors import InvalidConfig, ModelError, NumericalError, SccError
from .experiments import (
    DESK_SCALE,
    ExperimentSpec,
    figure1_suite,
    run_experiment,
    write_case,
)
from .io import (
    write_density_csv,
    write_json,
    write_solution_csv,
    write_spectrum_csv,
)
from .lsd import DEFAULT_EPS_SCHEDULE, EquationContext, density, solve_grid
from .lsd.solver import DEFAULT_MAX_ITER, DEFAULT_TOL
from .model import Mode, validate
from .sampling import draw_sample, dump_sample
from .spectra import (
    block_matrix_eigenvalues,
    canonical_correlations,
    projection_sum_eigenvalues,
    verify_identities,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
IDENTITY_TOL = 1e-8


class CliError(SccError):
    code = "USAGE"


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, count = text.split(":")
        return np.linspace(float(a), float(b), int(count))
    except ValueError:
        raise CliError(f"grid {text!r} must look like a:b:count") from None


def parse_eps(text: str) -> tuple[float, ...]:
    try:
        eps = tuple(float(e) for e in text.split(","))
    except ValueError:
        raise CliError(f"eps schedule {text!r} must be comma-separated numbers") from None
    if not eps or min(eps) <= 0:
        raise CliError("eps schedule values must be positive")
    return eps


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise CliError(f"cannot parse complex number {text!r}") from None


def _load(args):
    if not args.config:
        raise CliError("--config is required for this command")
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    doc = read_document(args.config, overrides)
    return doc, config_from_dict(doc)


def _require_valid(config):
    report = validate(config)
    if not report.ok:
        raise InvalidConfig(report.summary(), report)
    return report


def _solver_opts(args, doc):
    opts = dict(doc.get("solver", {}))
    eps = parse_eps(args.eps_schedule) if args.eps_schedule else tuple(opts.get("eps_schedule", DEFAULT_EPS_SCHEDULE))
    mode = Mode(args.mode or opts.get("mode", Mode.FINITE.value))
    return eps, mode, opts.get("tol", DEFAULT_TOL), opts.get("max_iter", DEFAULT_MAX_ITER)


def _out(args) -> Path:
    d = Path(args.output)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_validate(args) -> int:
    _, config = _load(args)
    report = validate(config)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    if args.output:
        write_json(_out(args) / "validation.json", report.to_dict())
    if not report.ok:
        raise InvalidConfig(report.summary(), report)
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc, config = _load(args)
    _require_valid(config)
    out = _out(args)
    reps = args.replicates or doc.get("experiment", {}).get("replicates", 1)
    for r in range(reps):
        s = draw_sample(config, r)
        write_spectrum_csv(out / f"scc_{r}.csv", canonical_correlations(s))
        write_spectrum_csv(out / f"block_{r}.csv", block_matrix_eigenvalues(s))
        write_spectrum_csv(out / f"projection_{r}.csv", projection_sum_eigenvalues(s))
        if args.dump:
            dump_sample(out / "samples", s)
    print(f"simulated {reps} replicate(s) of (p, q, n) = ({config.dims.p}, {config.dims.q}, {config.dims.n}) into {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    doc, config = _load(args)
    _require_valid(config)
    _, mode, tol, max_iter = _solver_opts(args, doc)
    ctx = EquationContext.from_config(config, mode)
    xs = parse_grid(args.grid or "0:1:101")
    sol = solve_grid(xs + 1j * args.imag, ctx, tol=tol, max_iter=max_iter)
    path = write_solution_csv(_out(args) / "solution.csv", sol)
    bad = int((~sol.converged).sum())
    print(f"solved {len(sol)} points, {bad} unconverged, max residual {np.max(sol.residual):.3g} -> {path}")
    if bad:
        raise NumericalError(f"{bad} grid points did not converge")
    return EXIT_OK


def cmd_density(args) -> int:
    doc, config = _load(args)
    _require_valid(config)
    eps, mode, tol, _ = _solver_opts(args, doc)
    ctx = EquationContext.from_config(config, mode)
    points = doc.get("experiment", {}).get("grid_points", 501)
    xs = parse_grid(args.grid) if args.grid else np.linspace(0, 1, points)
    curve = density(ctx, xs, eps, tol=tol, threads=args.threads)
    out = _out(args)
    write_density_csv(out / "lsd.csv", curve)
    write_json(out / "density.json", {
        "mass": curve.mass, "atom_zero": curve.atom_zero, "total_mass": curve.total_mass,
        "eps_schedule": list(curve.eps_schedule), "flagged": int(curve.flagged.sum()),
        "min_before_clamp": curve.min_raw, "mode": mode.value,
    })
    print(f"density on {xs.size} points: mass {curve.mass:.6f} + atom {curve.atom_zero:.6f}")
    if curve.flagged.any():
        raise NumericalError(f"{int(curve.flagged.sum())} density points failed to converge")
    return EXIT_OK


def cmd_verify(args) -> int:
    _, config = _load(args)
    _require_valid(config)
    z = parse_complex(args.z)
    report = verify_identities(draw_sample(config, args.replicate), z)
    print(f"block multiset distance {report.block_distance:.3g}")
    print(f"trace identity residual {report.trace_residual:.3g}")
    print(f"H/B multiset distance   {report.h_block_distance:.3g}")
    print(f"H zero count {report.h_zero_count} (expected {report.expected_zero_count})")
    if args.output:
        write_json(_out(args) / "identities.json", report.to_dict())
    if not report.passed(IDENTITY_TOL):
        raise NumericalError(f"identity residuals exceed {IDENTITY_TOL:g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    doc, config = _load(args)
    _require_valid(config)
    eps, mode, _, _ = _solver_opts(args, doc)
    exp = doc.get("experiment", {})
    grid = parse_grid(args.grid) if args.grid else np.linspace(0, 1, exp.get("grid_points", 501))
    spec = ExperimentSpec(
        config,
        replicates=args.replicates or exp.get("replicates", 20),
        density_grid=grid,
        comparison=exp.get("comparison", "both"),
        eps_schedule=eps,
        mode=mode,
        threads=args.threads,
    )
    report = run_experiment(spec)
    write_case(_out(args), report, exp.get("bins", 50), include_runtime=not args.no_runtime)
    print(f"KS {report.ks:.4f}  W1 {report.w1 if report.w1 is None else round(report.w1, 5)}  LSD mass {report.lsd_mass:.4f}")
    return EXIT_OK


def cmd_figure1(args) -> int:
    dist, seed = "gamma42", 0
    if args.config:
        _, config = _load(args)
        dist, seed = config.dist, config.seed
    elif args.seed is not None:
        seed = args.seed
    eps = parse_eps(args.eps_schedule) if args.eps_schedule else DEFAULT_EPS_SCHEDULE
    grid = parse_grid(args.grid) if args.grid else None
    reports = figure1_suite(
        scale=args.scale, dist=dist, replicates=args.replicates or 20, seed=seed,
        out_dir=_out(args), threads=args.threads, grid=grid, eps_schedule=eps,
        include_runtime=not args.no_runtime,
    )
    for r in reports:
        gap = "gap" if r.gap["found"] else "no gap"
        print(f"{r.case:10s} (p,q,n)=({r.dims.p},{r.dims.q},{r.dims.n})  KS {r.ks:.4f}  {gap}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "density": cmd_density,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "figure1": cmd_figure1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scclsd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON model configuration")
    common.add_argument("--output", default="out", help="output directory")
    common.add_argument("--set", action="append", metavar="K=V", help="override a config key (dotted path)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int)
    common.add_argument("--scale", type=float, default=DESK_SCALE)
    common.add_argument("--grid", help="a:b:count")
    common.add_argument("--eps-schedule", help="e1,e2,e3")
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--replicates", type=int)
    common.add_argument("--imag", type=float, default=1e-2, help="imaginary part for `solve`")
    common.add_argument("--z", default="0.5+0.5j", help="spectral argument for `verify`")
    common.add_argument("--replicate", type=int, default=0)
    common.add_argument("--dump", action="store_true", help="write X, Y binary matrices")
    common.add_argument("--no-runtime", action="store_true", help="omit timings from report.json")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ModelError, CliError) as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: INVALID_ARGUMENT: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
