"""Manufactured solutions, error measurement and convergence studies.

The registry holds problems with known exact solutions.  ``paper36`` is the
polynomial test problem whose reference error tables are reproduced by
:func:`reproduce_tables`; the ``sine-*`` problems exercise homogeneous
Dirichlet and Robin data, with the variable order or (``*-const``) a
constant order 1/2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PreconditionError
from .fracops import caputo_quadrature, gamma
from .mesh import Grid, SolutionHistory
from .solver import Dirichlet, ProblemSpec, Robin, SolverConfig, march, sigma_threshold

__all__ = [
    "ManufacturedProblem",
    "ConvergenceRow",
    "ConvergenceTable",
    "registry",
    "get_problem",
    "solve",
    "max_error_at_final",
    "convergence_order",
    "temporal_study",
    "coupled_study",
    "continuous_residual",
    "reproduce_tables",
    "REFERENCE_SIGMA",
]

# Reference sigma for the polynomial test problem, from min alpha = 1/10.
REFERENCE_SIGMA = sigma_threshold(0.1)

TABLE1_X = [i / 10 for i in range(11)]
TABLE1 = {
    "numerical": [5.0, 6.6068921, 8.4813103, 10.7677569, 13.7191945, 17.7407866,
                  23.4561082, 31.8041726, 44.1761384, 62.6016758, 90.0],
    "exact": [5.0, 6.6076515, 8.4849920, 10.7772305, 13.7381760, 17.7734375,
              23.5063040, 31.8738645, 44.2609280, 62.6793035, 90.0],
    "error": [0.0, 0.0007594, 0.0036817, 0.0094736, 0.0189815, 0.0326509,
              0.0501958, 0.0696919, 0.0847896, 0.0776277, 0.0],
}
TABLE2_TAUS = (1 / 256, 1 / 1024, 1 / 4096)
TABLE2_ERRORS = (0.0344960, 0.0086690, 0.0021738)
TABLE2_ORDERS = (None, 0.996, 0.998)
TABLE3_HS = (1 / 40, 1 / 80, 1 / 160)
TABLE3_ERRORS = (0.0056275, 0.0014141, 0.0003542)
TABLE3_ORDERS = (None, 1.993, 1.997)


@dataclass
class ManufacturedProblem:
    """A problem together with its exact solution.

    ``exact_dx`` is the exact spatial derivative; it is only needed to check
    Robin data.  Construction verifies that the exact solution matches the
    boundary and initial data on a sample grid.
    """

    name: str
    spec: ProblemSpec
    exact: Callable
    exact_dx: Callable | None = None
    description: str = ""
    data_tol: float = 1e-12

    def __post_init__(self):
        self.check_data()

    def check_data(self, samples: int = 17) -> None:
        spec = self.spec
        x = np.linspace(0.0, spec.l, samples)
        ts = np.linspace(0.0, spec.T, samples)

        def close(a, b, what):
            a = np.asarray(a, dtype=float)
            b = np.asarray(b, dtype=float)
            if np.any(np.abs(a - b) > self.data_tol * np.maximum(1.0, np.abs(b))):
                raise PreconditionError(f"{self.name}: exact solution violates {what}")

        close(self.exact(x, 0.0), spec.u0(x), "the initial data")
        bc = spec.bc
        for t in ts:
            if isinstance(bc, Dirichlet):
                close(self.exact(0.0, t), bc.mu1(t), "the left boundary value")
                close(self.exact(spec.l, t), bc.mu2(t), "the right boundary value")
            else:
                if self.exact_dx is None:
                    raise PreconditionError(f"{self.name}: Robin data needs exact_dx")
                left = spec.k(0.0, t) * self.exact_dx(0.0, t)
                close(left, bc.beta1(t) * self.exact(0.0, t) - bc.mu1(t), "the left Robin condition")
                right = -spec.k(spec.l, t) * self.exact_dx(spec.l, t)
                close(right, bc.beta2(t) * self.exact(spec.l, t) - bc.mu2(t), "the right Robin condition")

    @property
    def is_dirichlet(self) -> bool:
        return isinstance(self.spec.bc, Dirichlet)


def _variable_order(x):
    return (5.0 + 4.0 * np.sin(6.0 * np.asarray(x, dtype=float))) / 10.0


def _paper36() -> ManufacturedProblem:
    def px(x):
        return (x**3 + x + 1) * (3 * x**4 + 2 * x + 1)

    def px_dx(x):
        return (3 * x**2 + 1) * (3 * x**4 + 2 * x + 1) + (x**3 + x + 1) * (12 * x**3 + 2)

    def pt(t):
        return t**3 + 3 * t**2 + 1

    def k(x, t):
        return (5 + math.cos(t)) / px_dx(x)

    def q(x, t):
        return (1 + math.sin(t)) / px(x)

    def f(x, t):
        a = _variable_order(x)
        return px(x) * (6 * t ** (3 - a) / gamma(4 - a) + 6 * t ** (2 - a) / gamma(3 - a)) + (1 + math.sin(t)) * pt(t)

    spec = ProblemSpec(
        k=k, q=q, f=f, alpha=_variable_order, u0=px,
        bc=Dirichlet(mu1=pt, mu2=lambda t: 18 * pt(t)),
    )
    return ManufacturedProblem(
        name="paper36",
        spec=spec,
        exact=lambda x, t: px(x) * pt(t),
        exact_dx=lambda x, t: px_dx(x) * pt(t),
        description="polynomial solution, inhomogeneous Dirichlet data",
    )


def _sine_parts(order):
    def u(x, t):
        return np.sin(np.pi * x) * (t**3 + 1)

    def u_dx(x, t):
        return np.pi * np.cos(np.pi * x) * (t**3 + 1)

    def f(x, t):
        a = order(x)
        return np.sin(np.pi * x) * (6 * t ** (3 - a) / gamma(4 - a) + np.pi**2 * (t**3 + 1))

    return u, u_dx, f


def _sine_dirichlet(order=_variable_order) -> ManufacturedProblem:
    u, u_dx, f = _sine_parts(order)
    spec = ProblemSpec(
        k=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        q=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        f=f, alpha=order, u0=lambda x: u(x, 0.0),
        bc=Dirichlet(mu1=lambda t: 0.0, mu2=lambda t: 0.0),
    )
    return ManufacturedProblem("sine-dirichlet", spec, u, u_dx, "sin(pi x)(t^3 + 1), homogeneous Dirichlet")


def _sine_robin(order=_variable_order) -> ManufacturedProblem:
    u, u_dx, f = _sine_parts(order)
    flux = lambda t: -np.pi * (t**3 + 1)  # noqa: E731
    spec = ProblemSpec(
        k=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        q=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        f=f, alpha=order, u0=lambda x: u(x, 0.0),
        bc=Robin(beta1=lambda t: 1.0, beta2=lambda t: 1.0, mu1=flux, mu2=flux),
    )
    return ManufacturedProblem("sine-robin", spec, u, u_dx, "sin(pi x)(t^3 + 1), Robin data with beta = 1")


def _constant(value):
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


def _zero() -> ManufacturedProblem:
    zeros = lambda x, t=0.0: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    spec = ProblemSpec(
        k=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        q=zeros, f=zeros, alpha=lambda x: np.full_like(np.asarray(x, dtype=float), 0.5),
        u0=zeros, bc=Dirichlet(mu1=lambda t: 0.0, mu2=lambda t: 0.0),
    )
    return ManufacturedProblem("zero", spec, zeros, zeros, "all data zero")


def _constant_robin(c: float = 2.0) -> ManufacturedProblem:
    spec = ProblemSpec(
        k=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        q=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        f=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        alpha=_variable_order,
        u0=lambda x: np.full_like(np.asarray(x, dtype=float), c),
        bc=Robin(beta1=lambda t: 1.0, beta2=lambda t: 1.0, mu1=lambda t: c, mu2=lambda t: c),
    )
    return ManufacturedProblem(
        "constant-robin", spec,
        exact=lambda x, t: np.full_like(np.asarray(x, dtype=float), c),
        exact_dx=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        description="u = 2, Robin data with beta = 1",
    )


_BUILDERS = {
    "paper36": _paper36,
    "sine-dirichlet": _sine_dirichlet,
    "sine-robin": _sine_robin,
    "zero": _zero,
    "constant-robin": _constant_robin,
    "sine-dirichlet-const": lambda: _renamed(_sine_dirichlet(_constant(0.5)), "sine-dirichlet-const"),
    "sine-robin-const": lambda: _renamed(_sine_robin(_constant(0.5)), "sine-robin-const"),
}


def _renamed(problem: ManufacturedProblem, name: str) -> ManufacturedProblem:
    problem.name = name
    problem.description += ", constant order 1/2"
    return problem


def registry() -> dict[str, ManufacturedProblem]:
    """Fresh instances of every registered problem, by name."""
    return {name: build() for name, build in _BUILDERS.items()}


def get_problem(name: str) -> ManufacturedProblem:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(_BUILDERS)}") from None


def solve(problem: ManufacturedProblem, N: int, j0: int, sigma="auto") -> SolutionHistory:
    config = SolverConfig(grid=problem.spec.grid(N, j0), sigma=sigma)
    return march(problem.spec, config)


def max_error_at_final(history: SolutionHistory, exact: Callable) -> float:
    """Largest nodal error at the final time level."""
    grid = history.grid
    if not history.complete:
        raise PreconditionError("history is incomplete")
    ref = np.broadcast_to(np.asarray(exact(grid.x, grid.T), dtype=float), (grid.N + 1,))
    return float(np.max(np.abs(history.final - ref)))


def convergence_order(e1: float, e2: float, step1: float, step2: float) -> float | None:
    """``log(e1/e2) / log(step1/step2)``; ``None`` when an error vanishes."""
    if e1 <= 0 or e2 <= 0:
        return None
    return math.log(e1 / e2) / math.log(step1 / step2)


@dataclass
class ConvergenceRow:
    h: float
    tau: float
    max_error: float
    order: float | None = None


@dataclass
class ConvergenceTable:
    """Rows of a refinement study; ``mode`` is ``temporal`` or ``coupled``."""

    mode: str
    rows: list[ConvergenceRow] = field(default_factory=list)

    def add(self, h: float, tau: float, max_error: float) -> None:
        order = None
        if self.rows:
            prev = self.rows[-1]
            if self.mode == "temporal":
                order = convergence_order(prev.max_error, max_error, prev.tau, tau)
            else:
                order = convergence_order(prev.max_error, max_error, prev.h, h)
        self.rows.append(ConvergenceRow(h, tau, max_error, order))

    @property
    def errors(self) -> list[float]:
        return [r.max_error for r in self.rows]

    @property
    def orders(self) -> list[float | None]:
        return [r.order for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["h", "tau", "max_error", "order"])
        for r in self.rows:
            writer.writerow([f"{r.h:.17g}", f"{r.tau:.17g}", f"{r.max_error:.17g}",
                             "" if r.order is None else f"{r.order:.17g}"])
        return buf.getvalue()

    def to_markdown(self) -> str:
        step = "tau" if self.mode == "temporal" else "h"
        lines = [f"| {step} | Maximum error | Convergence order |", "|---|---|---|"]
        for r in self.rows:
            value = r.tau if self.mode == "temporal" else r.h
            order = "" if r.order is None else f"{r.order:.3f}"
            lines.append(f"| {_fraction_label(value)} | {r.max_error:.7f} | {order} |")
        return "\n".join(lines)


def _fraction_label(value: float) -> str:
    inv = 1.0 / value
    if abs(inv - round(inv)) < 1e-9:
        return f"1/{round(inv)}"
    return f"{value:.6g}"


def temporal_study(problem: ManufacturedProblem, h: float, taus: Sequence[float], sigma="auto") -> ConvergenceTable:
    """Refine ``tau`` at fixed ``h``."""
    taus = list(taus)
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise PreconditionError("taus must be strictly decreasing")
    table = ConvergenceTable("temporal")
    for tau in taus:
        grid = Grid.from_steps(h, tau, problem.spec.l, problem.spec.T)
        history = march(problem.spec, SolverConfig(grid=grid, sigma=sigma))
        table.add(grid.h, grid.tau, max_error_at_final(history, problem.exact))
    return table


def coupled_study(problem: ManufacturedProblem, hs: Sequence[float], sigma="auto") -> ConvergenceTable:
    """Refine ``h`` with ``tau = h^2``."""
    hs = list(hs)
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise PreconditionError("hs must be strictly decreasing")
    table = ConvergenceTable("coupled")
    for h in hs:
        grid = Grid.from_steps(h, h * h, problem.spec.l, problem.spec.T)
        history = march(problem.spec, SolverConfig(grid=grid, sigma=sigma))
        table.add(grid.h, grid.tau, max_error_at_final(history, problem.exact))
    return table


def _central(fn, x, delta):
    # fourth-order central difference
    return (fn(x - 2 * delta) - 8 * fn(x - delta) + 8 * fn(x + delta) - fn(x + 2 * delta)) / (12 * delta)


def continuous_residual(problem: ManufacturedProblem, x: float, t: float, m: int = 1 << 16, delta: float = 1e-3) -> float:
    """``|D^alpha u - (k u_x)_x + q u - f|`` for the exact solution at ``(x, t)``.

    The Caputo term uses product integration on ``m`` cells; the flux
    derivative uses nested fourth-order central differences.
    """
    spec = problem.spec
    alpha = float(np.asarray(spec.alpha(np.array([x])), dtype=float)[0])
    caputo = caputo_quadrature(lambda s: problem.exact(x, s), alpha, t, m)

    def flux(xx):
        return float(np.asarray(spec.k(np.array([xx]), t)).ravel()[0]) * _central(
            lambda z: float(np.asarray(problem.exact(z, t)).ravel()[0]), xx, delta
        )

    diffusion = _central(flux, x, delta)
    xa = np.array([x])
    u = float(np.asarray(problem.exact(x, t)).ravel()[0])
    q = float(np.asarray(spec.q(xa, t)).ravel()[0])
    f = float(np.asarray(spec.f(xa, t)).ravel()[0])
    return abs(caputo - diffusion + q * u - f)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class TablesResult:
    table1: list[tuple[float, float, float, float]]
    table2: ConvergenceTable
    table3: ConvergenceTable
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        out = ["Table 1: t = 1, h = 1/10, tau = 1/100", "",
               "| x_i | Numerical solution | Exact solution | Error |", "|---|---|---|---|"]
        for x, y, u, e in self.table1:
            out.append(f"| {x:.4f} | {y:.7f} | {u:.7f} | {e:.7f} |")
        out += ["", "Table 2: maximum error at t = 1, h = 1/500", "", self.table2.to_markdown()]
        out += ["", "Table 3: maximum error at t = 1, h^2 = tau", "", self.table3.to_markdown()]
        out += [""] + [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]
        return "\n".join(out)


def table1(sigma: float = REFERENCE_SIGMA):
    problem = get_problem("paper36")
    history = solve(problem, N=10, j0=100, sigma=sigma)
    x = history.grid.x
    exact = problem.exact(x, 1.0)
    y = history.final
    return [(float(xi), float(yi), float(ui), float(abs(yi - ui))) for xi, yi, ui in zip(x, y, exact)]


def _table_checks(name, table, ref_errors, ref_orders):
    checks = []
    for row, ref in zip(table.rows, ref_errors):
        rel = abs(row.max_error - ref) / ref
        checks.append(Check(f"{name} error h={_fraction_label(row.h)} tau={_fraction_label(row.tau)}",
                            rel <= 0.01, f"{row.max_error:.7f} vs {ref:.7f} (rel {rel:.2e}, tol 1e-2)"))
    for row, ref in zip(table.rows, ref_orders):
        if ref is None:
            continue
        ok = row.order is not None and abs(row.order - ref) <= 0.02
        got = "none" if row.order is None else f"{row.order:.4f}"
        checks.append(Check(f"{name} order h={_fraction_label(row.h)} tau={_fraction_label(row.tau)}",
                            ok, f"{got} vs {ref:.3f} (tol 0.02)"))
    return checks


def reproduce_tables(sigma: float = REFERENCE_SIGMA) -> TablesResult:
    """Rerun the three reference experiments for ``paper36`` and compare."""
    problem = get_problem("paper36")
    t1 = table1(sigma)
    checks = []
    err = max(abs(row[3] - ref) for row, ref in zip(t1, TABLE1["error"]))
    checks.append(Check("table1 errors", err <= 1e-5, f"max deviation {err:.2e} (tol 1e-5)"))
    ex = max(abs(row[2] - ref) for row, ref in zip(t1, TABLE1["exact"]))
    checks.append(Check("table1 exact", ex <= 1e-7, f"max deviation {ex:.2e} (tol 1e-7)"))
    t2 = temporal_study(problem, 1 / 500, TABLE2_TAUS, sigma)
    checks += _table_checks("table2", t2, TABLE2_ERRORS, TABLE2_ORDERS)
    t3 = coupled_study(problem, TABLE3_HS, sigma)
    checks += _table_checks("table3", t3, TABLE3_ERRORS, TABLE3_ORDERS)
    return TablesResult(t1, t2, t3, checks)
