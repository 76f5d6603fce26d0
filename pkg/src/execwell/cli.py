"""Command-line interface: solve, certify, classify, simulate, sweep."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import IO, Optional

from . import __version__
from .impact import MarketModel, discretize
from .discrete import (
    NotApplicableError,
    NotSPDError,
    check_bmatrix_sufficient,
    cost,
    impact_matrix,
    is_b_matrix,
    is_diagonally_dominant,
    is_spd,
    solve_optimal,
)
from .continuous import (
    BracketFailureError,
    ExistenceUncertifiedError,
    SingularModelError,
    ToleranceFailureError,
    UnsupportedModelError,
    closed_form,
    solve_bvp_shooting,
)
from .analysis import classify_wellposedness, monte_carlo_is
from .sweep import SweepSpec, cells_to_json, run_sweep, write_cells_csv


class CliError(Exception):
    """Input validation failure; maps to exit code 2."""


_SOLVER_TAGS = {
    NotSPDError: "NotSPD",
    BracketFailureError: "BracketFailure",
    ToleranceFailureError: "ToleranceFailure",
    SingularModelError: "Singular",
    UnsupportedModelError: "Unsupported",
    ExistenceUncertifiedError: "ExistenceUncertified",
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse owns --help/--version and flag errors
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except tuple(_SOLVER_TAGS) as exc:
        print(json.dumps(_solver_payload(exc), indent=2))
        return 3
    except (ValueError, KeyError, TypeError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _solver_payload(exc: Exception) -> dict:
    tag = next(tag for cls, tag in _SOLVER_TAGS.items() if isinstance(exc, cls))
    payload = {"error": tag, "message": str(exc)}
    if isinstance(exc, NotSPDError):
        payload["smallest_pivot"] = exc.smallest_pivot
    if isinstance(exc, ExistenceUncertifiedError):
        cert = exc.certificate
        payload["certificate"] = {
            "integral_theta": cert.integral_theta,
            "integral_eta": cert.integral_eta,
            "bound": cert.bound,
            "satisfied": cert.satisfied,
        }
    return payload


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="execwell",
        description="Optimal execution schedules and well-posedness certification "
                    "for time-varying market impact.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-discrete", help="closed-form optimal trade schedule")
    p.add_argument("--model", required=True)
    p.add_argument("--n", required=True, type=int, help="number of trading intervals")
    p.add_argument("--q", type=float, default=None, help="override the model quantity")
    p.set_defaults(handler=_cmd_solve_discrete)

    p = sub.add_parser("certify", help="discrete well-posedness certificates")
    p.add_argument("--model", required=True)
    p.add_argument("--n", required=True, type=int)
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("solve-continuous", help="shooting solve of the inventory BVP")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", type=int, default=2000, help="RK4 panels (even, >= 100)")
    p.add_argument("--tol", type=float, default=1e-8, help="terminal tolerance relative to |Q|")
    p.add_argument("--force", action="store_true", help="skip the existence gate")
    p.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p.add_argument("--plot", default=None, help="also render the trajectory to this image file")
    p.set_defaults(handler=_cmd_solve_continuous)

    p = sub.add_parser("closed-form", help="analytic schedule for recognized regimes")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None)
    p.set_defaults(handler=_cmd_closed_form)

    p = sub.add_parser("classify", help="regime report for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=None, help="discrete classification with n intervals")
    p.add_argument("--grid", type=int, default=None, help="continuous classification grid")
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("simulate", help="Monte-Carlo implementation shortfall")
    p.add_argument("--model", required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep over impact-decay space")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="CSV destination")
    p.add_argument("--out-json", default=None, help="also emit the grid as JSON")
    p.add_argument("--force", action="store_true", help="solve inadmissible cells too")
    p.add_argument("--plot", default=None, help="also render a heatmap to this image file")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker cap (EXECWELL_JOBS fallback); the solver is deterministic "
                        "regardless of the value")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def _load_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {what} file '{path}': {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in {what} file '{path}': {exc}") from exc


def _load_model(path: str) -> MarketModel:
    try:
        return MarketModel.from_json(_load_json(path, "model"))
    except ValueError as exc:
        raise CliError(f"invalid model '{path}': {exc}") from exc


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _cmd_solve_discrete(args) -> int:
    model = _load_model(args.model)
    if args.n < 1:
        raise CliError("--n must be a positive integer")
    q = model.Q if args.q is None else float(args.q)
    grid = discretize(model, args.n)
    matrix = impact_matrix(grid)
    strategy = solve_optimal(matrix, q)
    payload = {
        "n": args.n,
        "q": q,
        "xi": [float(x) for x in strategy.xi],
        "cost": cost(matrix, strategy),
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_certify(args) -> int:
    model = _load_model(args.model)
    if args.n < 1:
        raise CliError("--n must be a positive integer")
    grid = discretize(model, args.n)
    matrix = impact_matrix(grid)
    dd_ok, dd_row = is_diagonally_dominant(grid)
    spd_ok, pivot = is_spd(matrix)
    b_ok, b_row = is_b_matrix(matrix)
    try:
        from .discrete import _restrictive_terms

        lhs, step_budget, worst_row = _restrictive_terms(grid)
        restrictive = {"holds": check_bmatrix_sufficient(grid), "lhs": lhs,
                       "step_budget": step_budget, "worst_row": worst_row}
    except NotApplicableError as exc:
        restrictive = {"holds": None, "note": f"not_applicable: {exc}"}
    payload = {
        "n": args.n,
        "certificates": {
            "diagonally_dominant": {"holds": dd_ok, "first_violation_row": dd_row},
            "spd": {"holds": spd_ok, "smallest_pivot": pivot},
            "b_matrix": {"holds": b_ok, "first_violation_row": b_row},
            "restrictive_b_inequality": restrictive,
        },
    }
    print(json.dumps(payload, indent=2))
    return 0


def _write_trajectory_csv(traj, out: Optional[str]) -> None:
    def emit(fh: IO[str]) -> None:
        fh.write("time,zeta,zeta_dot\n")
        for t, z, v in zip(traj.times, traj.zeta, traj.zeta_dot):
            fh.write(f"{_g17(t)},{_g17(z)},{_g17(v)}\n")

    if out is None:
        emit(sys.stdout)
    else:
        with open(out, "w") as fh:
            emit(fh)


def _cmd_solve_continuous(args) -> int:
    model = _load_model(args.model)
    traj = solve_bvp_shooting(model, steps=args.grid, tol=args.tol, force=args.force)
    _write_trajectory_csv(traj, args.out)
    if args.plot:
        from .plotting import save_trajectory_plot

        save_trajectory_plot(traj, args.plot)
    return 0


def _cmd_closed_form(args) -> int:
    model = _load_model(args.model)
    traj = closed_form(model, steps=args.grid)
    _write_trajectory_csv(traj, args.out)
    if args.plot:
        from .plotting import save_trajectory_plot

        save_trajectory_plot(traj, args.plot)
    return 0


def _cmd_classify(args) -> int:
    model = _load_model(args.model)
    if args.n is not None and args.grid is not None:
        raise CliError("use either --n or --grid, not both")
    if args.n is not None:
        report = classify_wellposedness(model, n=args.n)
    else:
        report = classify_wellposedness(model, steps=args.grid if args.grid is not None else 2000)
    print(json.dumps(report.to_json(), indent=2))
    return 0


def _cmd_simulate(args) -> int:
    model = _load_model(args.model)
    traj = solve_bvp_shooting(model, steps=args.grid, force=args.force)
    mean, stderr = monte_carlo_is(model, traj, paths=args.paths, seed=args.seed)
    print(json.dumps({"mean_is": mean, "stderr": stderr,
                      "paths": args.paths, "seed": args.seed}, indent=2))
    return 0


def _resolve_jobs(args) -> int:
    raw = args.jobs
    if raw is None:
        env = os.environ.get("EXECWELL_JOBS")
        if env is not None:
            try:
                raw = int(env)
            except ValueError as exc:
                raise CliError(f"EXECWELL_JOBS must be an integer, got {env!r}") from exc
    if raw is None:
        return 1
    if raw < 1:
        raise CliError("--jobs must be a positive integer")
    return raw


def _cmd_sweep(args) -> int:
    _resolve_jobs(args)  # validated; the sweep engine is single-process deterministic
    try:
        spec = SweepSpec.from_json(_load_json(args.spec, "sweep spec"))
    except ValueError as exc:
        raise CliError(f"invalid sweep spec '{args.spec}': {exc}") from exc
    cells = run_sweep(spec, force=args.force)
    with open(args.out, "w") as fh:
        write_cells_csv(cells, fh)
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(cells_to_json(cells), indent=2))
    if args.plot:
        from .plotting import save_sweep_heatmap

        save_sweep_heatmap(spec, cells, args.plot)
    return 0


if __name__ == "__main__":
    sys.exit(main())
