"""Command-line front end.

    vofrac solve --problem paper36 --N 10 --j0 100 --out sol.csv
    vofrac study --problem paper36 --mode coupled --hs 1/40,1/80,1/160
    vofrac check-estimates --problem sine-robin --N 20 --j0 100
    vofrac check-lemmas --trials 1000 --seed 42
    vofrac tables

Exit codes: 0 success, 1 check failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericalFailure, PreconditionError, ProblemDataError, SingularSystemError
from .estimates import lemma_sweep, monitor_estimate
from .mesh import Grid
from .solver import SolverConfig, march
from .verify import REFERENCE_SIGMA, coupled_study, get_problem, max_error_at_final, reproduce_tables, temporal_study

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
COMMANDS = ("solve", "study", "check-estimates", "check-lemmas", "tables")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: str = "paper36"
    N: int | None = None
    j0: int | None = None
    h: float | None = None
    tau: float | None = None
    sigma: float | str = "auto"
    bc: str | None = None
    out: Path | None = None
    trials: int = 1000
    seed: int = 0
    mode: str | None = None
    taus: tuple[float, ...] = ()
    hs: tuple[float, ...] = ()

    def grid(self, l: float, T: float) -> Grid:  # noqa: E741
        counts = self.N is not None or self.j0 is not None
        steps = self.h is not None or self.tau is not None
        if counts and steps:
            raise UsageError("give either --N/--j0 or --h/--tau, not both")
        try:
            if counts:
                if self.N is None or self.j0 is None:
                    raise UsageError("--N and --j0 must be given together")
                return Grid(N=self.N, j0=self.j0, l=l, T=T)
            if steps:
                if self.h is None or self.tau is None:
                    raise UsageError("--h and --tau must be given together")
                return Grid.from_steps(self.h, self.tau, l, T)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        raise UsageError("a grid is required: --N/--j0 or --h/--tau")


def _fraction(text: str) -> float:
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _fraction_list(text: str) -> tuple[float, ...]:
    return tuple(_fraction(part) for part in text.split(",") if part.strip())


def _sigma(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"sigma must be 'auto' or a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vofrac", description="Variable-order time-fractional diffusion solver.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", default="paper36", help="registry name (default: paper36)")
    parser.add_argument("--N", type=int, help="spatial cell count")
    parser.add_argument("--j0", type=int, help="time step count")
    parser.add_argument("--h", type=_fraction, help="spatial step, e.g. 1/500")
    parser.add_argument("--tau", type=_fraction, help="time step, e.g. 1/4096")
    parser.add_argument("--sigma", type=_sigma, default=None, help="time weight: auto or a value in [0, 1]")
    parser.add_argument("--bc", choices=("dirichlet", "robin"), help="must agree with the problem")
    parser.add_argument("--out", type=Path, help="output file (directory for 'tables')")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=("temporal", "coupled"))
    parser.add_argument("--taus", type=_fraction_list, default=(), help="comma-separated, decreasing")
    parser.add_argument("--hs", type=_fraction_list, default=(), help="comma-separated, decreasing")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    sigma = ns.sigma
    if sigma is None:
        sigma = REFERENCE_SIGMA if ns.command == "tables" else "auto"
    return RunConfig(
        command=ns.command, problem=ns.problem, N=ns.N, j0=ns.j0, h=ns.h, tau=ns.tau,
        sigma=sigma, bc=ns.bc, out=ns.out, trials=ns.trials, seed=ns.seed,
        mode=ns.mode, taus=tuple(ns.taus), hs=tuple(ns.hs),
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _load_problem(config: RunConfig):
    try:
        problem = get_problem(config.problem)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    if config.bc is not None:
        kind = "dirichlet" if problem.is_dirichlet else "robin"
        if config.bc != kind:
            raise UsageError(f"problem {problem.name!r} has {kind} data, not {config.bc}")
    if config.sigma != "auto" and not 0.0 <= config.sigma <= 1.0:
        raise UsageError("sigma must lie in [0, 1]")
    return problem


def solution_csv(grid: Grid, y, exact=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if exact is None:
        writer.writerow(["x", "numerical"])
        for xi, yi in zip(grid.x, y):
            writer.writerow([f"{xi:.17g}", f"{yi:.17g}"])
    else:
        u = np.broadcast_to(np.asarray(exact(grid.x, grid.T), dtype=float), y.shape)
        writer.writerow(["x", "numerical", "exact", "error"])
        for xi, yi, ui in zip(grid.x, y, u):
            writer.writerow([f"{xi:.17g}", f"{yi:.17g}", f"{ui:.17g}", f"{abs(yi - ui):.17g}"])
    return buf.getvalue()


def _cmd_solve(config: RunConfig) -> int:
    problem = _load_problem(config)
    grid = config.grid(problem.spec.l, problem.spec.T)
    history = march(problem.spec, SolverConfig(grid=grid, sigma=config.sigma))
    _emit(solution_csv(grid, history.final, problem.exact), config.out)
    if problem.exact is not None:
        msg = f"max error at t={grid.T:g}: {max_error_at_final(history, problem.exact):.10e}\n"
        (sys.stdout if config.out is not None else sys.stderr).write(msg)
    return EXIT_OK


def _cmd_study(config: RunConfig) -> int:
    problem = _load_problem(config)
    if config.mode == "temporal":
        if not config.taus or config.h is None:
            raise UsageError("temporal study needs --h and --taus")
        taus = list(config.taus)
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise UsageError("--taus must be strictly decreasing")
        table = temporal_study(problem, config.h, taus, config.sigma)
    elif config.mode == "coupled":
        if not config.hs:
            raise UsageError("coupled study needs --hs")
        hs = list(config.hs)
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise UsageError("--hs must be strictly decreasing")
        table = coupled_study(problem, hs, config.sigma)
    else:
        raise UsageError("study needs --mode temporal|coupled")
    if config.out is not None:
        config.out.write_text(table.to_csv())
    else:
        sys.stdout.write(table.to_csv())
    sys.stdout.write(table.to_markdown() + "\n")
    return EXIT_OK


def _cmd_check_estimates(config: RunConfig) -> int:
    problem = _load_problem(config)
    grid = config.grid(problem.spec.l, problem.spec.T)
    solver_config = SolverConfig(grid=grid, sigma=config.sigma)
    history = march(problem.spec, solver_config)
    try:
        report = monitor_estimate(history, problem.spec, solver_config)
    except PreconditionError as exc:
        raise UsageError(f"estimate monitor not applicable: {exc}") from exc
    if config.out is not None:
        config.out.write_text(report.to_csv())
    worst = min(r.margin for r in report.records)
    status = "PASS" if report.passed else "FAIL"
    sys.stdout.write(
        f"{status} {report.kind} estimate: {len(report.records)} levels, "
        f"{len(report.violations)} violations, smallest margin {worst:.6e}\n"
    )
    return EXIT_OK if report.passed else EXIT_CHECK


def _cmd_check_lemmas(config: RunConfig) -> int:
    if config.trials < 1:
        raise UsageError("--trials must be positive")
    sweep = lemma_sweep(config.trials, config.seed)
    lines = ["inequality,trials,failures,worst_scaled_margin"]
    for name in sweep.failures:
        lines.append(f"{name},{sweep.trials},{sweep.failures[name]},{sweep.worst[name]:.17g}")
    text = "\n".join(lines) + "\n"
    if config.out is not None:
        config.out.write_text(text)
    for name in sweep.failures:
        status = "PASS" if sweep.failures[name] == 0 else "FAIL"
        sys.stdout.write(f"{status} {name}: {sweep.failures[name]}/{sweep.trials} failures\n")
    return EXIT_OK if sweep.passed else EXIT_CHECK


def write_tables(result, directory: Path) -> None:
    """CSV files for the three reproduced tables."""
    directory.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "numerical", "exact", "error"])
    for row in result.table1:
        writer.writerow([f"{v:.17g}" for v in row])
    (directory / "table1.csv").write_text(buf.getvalue())
    (directory / "table2.csv").write_text(result.table2.to_csv())
    (directory / "table3.csv").write_text(result.table3.to_csv())


def _cmd_tables(config: RunConfig) -> int:
    sigma = REFERENCE_SIGMA if config.sigma == "auto" else config.sigma
    result = reproduce_tables(sigma)
    if config.out is not None:
        write_tables(result, config.out)
    sys.stdout.write(result.format() + "\n")
    return EXIT_OK if result.passed else EXIT_CHECK


_DISPATCH = {
    "solve": _cmd_solve,
    "study": _cmd_study,
    "check-estimates": _cmd_check_estimates,
    "check-lemmas": _cmd_check_lemmas,
    "tables": _cmd_tables,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        return _DISPATCH[config.command](config)
    except (UsageError, DomainError, PreconditionError, KeyError) as exc:
        sys.stderr.write(f"vofrac: usage error: {exc}\n")
        return EXIT_USAGE
    except (NumericalFailure, SingularSystemError, ProblemDataError, FloatingPointError) as exc:
        sys.stderr.write(f"vofrac: numerical failure in {config.command}: {exc}\n")
        return EXIT_NUMERICAL


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
