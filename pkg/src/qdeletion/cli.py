"""
Command-line interface.

    qdeletion optimize [--profile P] [--restarts N] [--seed S] [--tol T] [--out F] [--params-out F]
    qdeletion sweep --fix deletion|preservation --from A --to B --step H [--profile P] [--out F]
    qdeletion verify --params F [--all-profiles] [--tol T]
    qdeletion simulate --params F --trials N --seed S

Exit codes: 0 success, 1 usage error, 2 no feasible point / non-convergence,
3 I/O error. CSV goes to ``--out`` when given, otherwise to stdout with the
report on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from decimal import Decimal

from . import constraints, machine, optimizer, signaling
from .constraints import ConstraintProfile
from .errors import InvalidParams, NoFeasiblePoint, NormalizationError, ParseError

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

OPTIMIZE_COLUMNS = (
    "objective", "f_p", "f_d", "eta1", "eta2", "txx", "tzz", "tzy",
    "ns_norm", "min_eigenvalue", "converged", "seed",
)  # fmt: skip
SWEEP_COLUMNS = (
    "fixed_kind", "fixed_value", "max_other", "sum", "eta1", "eta2", "txx", "tzz", "tzy",
    "ns_norm", "min_eigenvalue", "restarts_used", "converged",
)  # fmt: skip


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(value) -> str:
    """12 significant digits for reals; lowercase booleans."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def load_params(path) -> machine.MachineParams:
    """Read a key-value parameter file. Raises ParseError, NormalizationError or OSError."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return machine.parse_params(text)


def _write_csv(rows, columns, out, stdout):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    if out is None:
        stdout.write(buf.getvalue())
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def _grid(start, stop, step):
    if step <= 0:
        raise UsageError("--step must be positive")
    if stop < start:
        raise UsageError("--to must not be below --from")
    # decimal arithmetic keeps 0.55 as 0.55
    a, b, h = Decimal(str(start)), Decimal(str(stop)), Decimal(str(step))
    n = int((b - a) / h + Decimal("1e-9"))
    values = [float(a + k * h) for k in range(n + 1)]
    if any(not 0.5 <= v <= 1.0 for v in values):
        raise UsageError("sweep values must lie in [0.5, 1]")
    return values


def _optimize_row(result, seed):
    p, f = result.params, result.fidelities
    return {
        "objective": float(result.objective),
        "f_p": f.f_p,
        "f_d": f.f_d,
        "eta1": p.eta1,
        "eta2": p.eta2,
        "txx": p.txx,
        "tzz": p.tzz,
        "tzy": p.tzy,
        "ns_norm": float(result.report.ns_norm),
        "min_eigenvalue": float(result.report.min_eigenvalue),
        "converged": result.converged,
        "seed": seed,
    }


def _sweep_row(pt):
    p = pt.params
    return {
        "fixed_kind": pt.fixed_kind,
        "fixed_value": pt.fixed_value,
        "max_other": float(pt.max_other),
        "sum": float(pt.sum),
        "eta1": p.eta1,
        "eta2": p.eta2,
        "txx": p.txx,
        "tzz": p.tzz,
        "tzy": p.tzy,
        "ns_norm": float(pt.ns_norm),
        "min_eigenvalue": float(pt.min_eigenvalue),
        "restarts_used": pt.restarts_used,
        "converged": pt.converged,
    }


def cmd_optimize(args, stdout, report):
    cfg = optimizer.OptimizerConfig(
        profile=args.profile, restarts=args.restarts, seed=args.seed, feas_tol=args.tol, workers=args.workers
    )
    print(f"profile: {cfg.profile.value}  restarts: {cfg.restarts}  seed: {cfg.seed}", file=report)
    code = EXIT_OK
    try:
        result = optimizer.maximize_sum(cfg)
    except NoFeasiblePoint as exc:
        print(f"error: {exc}", file=sys.stderr)
        result, code = exc.result, EXIT_INFEASIBLE
    f = result.fidelities
    print(f"F_p + F_d = {result.objective:.12g}  (F_p = {f.f_p:.12g}, F_d = {f.f_d:.12g})", file=report)
    print(result.report.summary(), file=report)
    feasible = sum(s.feasible for s in result.restarts)
    print(f"feasible restarts: {feasible}/{len(result.restarts)}", file=report)
    _write_csv([_optimize_row(result, cfg.seed)], OPTIMIZE_COLUMNS, args.out, stdout)
    if args.params_out:
        with open(args.params_out, "w", encoding="utf-8") as fh:
            fh.write(machine.format_params(result.params, f"optimize --profile {cfg.profile.value} --seed {cfg.seed}"))
    return code


def cmd_sweep(args, stdout, report):
    grid = _grid(args.start, args.stop, args.step)
    cfg = optimizer.OptimizerConfig(profile=args.profile, restarts=args.restarts, seed=args.seed, feas_tol=args.tol, workers=args.workers)
    print(f"profile: {cfg.profile.value}  fix: {args.fix}  points: {len(grid)}  restarts/point: {cfg.restarts}", file=report)
    points = optimizer.sweep(cfg, grid, args.fix)
    for pt in points:
        flag = "" if pt.converged else "  (not converged)"
        print(f"  {args.fix} = {pt.fixed_value:.4f}  max other = {pt.max_other:.6f}  sum = {pt.sum:.6f}{flag}", file=report)
    _write_csv([_sweep_row(pt) for pt in points], SWEEP_COLUMNS, args.out, stdout)
    if not all(pt.converged for pt in points):
        print("error: some sweep points did not reach feasibility", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args, stdout, report):
    params = load_params(args.params)
    profiles = (
        [ConstraintProfile.STRICT, ConstraintProfile.RELAXED, ConstraintProfile.MATRIX]
        if args.all_profiles
        else [ConstraintProfile.parse(args.profile)]
    )
    f = machine.fidelities(params)
    print(f"F_p = {f.f_p:.12g}  F_d = {f.f_d:.12g}  sum = {f.total:.12g}", file=stdout)
    ok = True
    for prof in profiles:
        rep = constraints.feasibility_report(params, prof, args.tol)
        print(f"{prof.value}: feasible={fmt(rep.feasible)} ns_norm={rep.ns_norm:.3e} min_eigenvalue={rep.min_eigenvalue:.3e}", file=stdout)
        for name, value in rep.ns_residuals.items():
            print(f"    {name} = {value:.3e}", file=stdout)
        ok &= rep.feasible
    print(f"helstrom_success = {signaling.helstrom_success(params):.12g}", file=stdout)
    if not ok:
        print("error: parameters are infeasible under at least one profile", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_simulate(args, stdout, report):
    params = load_params(args.params)
    stats = signaling.simulate_game(params, args.trials, args.seed, workers=args.workers)
    print(f"trials = {stats.trials}", file=stdout)
    print(f"successes = {stats.successes}", file=stdout)
    print(f"empirical_rate = {stats.empirical_rate:.12g}", file=stdout)
    print(f"analytic_rate = {stats.analytic_rate:.12g}", file=stdout)
    print(f"z_score = {stats.z_score:.12g}", file=stdout)
    return EXIT_OK


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdeletion", description="No-signaling bounds on covariant quantum deletion machines.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    profiles = [p.value for p in ConstraintProfile]

    p = sub.add_parser("optimize", help="maximize F_p + F_d")
    p.add_argument("--profile", choices=profiles, default="strict")
    p.add_argument("--restarts", type=_positive_int, default=64)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--tol", type=_positive_float, default=constraints.DEFAULT_OPTIMIZE_TOL)
    p.add_argument("--out")
    p.add_argument("--params-out")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="fix one fidelity and maximize the other over a grid")
    p.add_argument("--fix", choices=("deletion", "preservation"), required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--profile", choices=profiles, default="relaxed")
    p.add_argument("--restarts", type=_positive_int, default=64)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--tol", type=_positive_float, default=constraints.DEFAULT_OPTIMIZE_TOL)
    p.add_argument("--out")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check a parameter file against the constraint profiles")
    p.add_argument("--params", required=True)
    p.add_argument("--all-profiles", action="store_true")
    p.add_argument("--profile", choices=profiles, default="strict")
    p.add_argument("--tol", type=_positive_float, default=constraints.DEFAULT_VERIFY_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo the signaling game")
    p.add_argument("--params", required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        # keep stdout clean for CSV when no --out file is given
        report = stdout if getattr(args, "out", "") is not None else sys.stderr
        return args.func(args, stdout, report)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, NormalizationError, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
