"""Weighted implicit schemes for the variable-order time-fractional diffusion equation.

The equation is ``D^{alpha(x)} u = (k u_x)_x - q u + f`` on ``(0, l) x (0, T]``,
where ``D^{alpha}`` is the Caputo derivative.  Each step replaces the time
derivative with the L1 operator at node ``x_i`` and the spatial operator with
``Lambda(sigma y^{j+1} + (1 - sigma) y^j)``; coefficients are sampled at
``t_{j+1/2}``.  Every step is one tridiagonal solve over all ``N + 1`` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numba
import numpy as np

from ._history import DEFAULT_BLOCK, HistoryAccumulator, history_load_direct
from .errors import DomainError, NumericalFailure, PreconditionError, ProblemDataError, SingularSystemError
from .fracops import gamma, power_table
from .mesh import Grid, SolutionHistory

__all__ = [
    "Dirichlet",
    "Robin",
    "ProblemSpec",
    "SolverConfig",
    "TridiagonalSystem",
    "sigma_threshold",
    "thomas_solve",
    "assemble_dirichlet_step",
    "assemble_robin_step",
    "march",
]

RESIDUAL_TOL = 1e-11


@dataclass(frozen=True)
class Dirichlet:
    """``u(0, t) = mu1(t)``, ``u(l, t) = mu2(t)``."""

    mu1: Callable[[float], float]
    mu2: Callable[[float], float]


@dataclass(frozen=True)
class Robin:
    """``k u_x = beta1 u - mu1`` at ``x = 0`` and ``-k u_x = beta2 u - mu2`` at ``x = l``."""

    beta1: Callable[[float], float]
    beta2: Callable[[float], float]
    mu1: Callable[[float], float]
    mu2: Callable[[float], float]


BoundaryCondition = Union[Dirichlet, Robin]


@dataclass(frozen=True)
class ProblemSpec:
    """Continuous problem data.

    ``k``, ``q`` and ``f`` are called as ``fn(x, t)`` with an array ``x`` and
    a scalar ``t``; ``alpha`` and ``u0`` as ``fn(x)``; boundary data as
    ``fn(t)``.  All must broadcast over numpy arrays.
    """

    k: Callable
    q: Callable
    f: Callable
    alpha: Callable
    u0: Callable
    bc: BoundaryCondition
    l: float = 1.0  # noqa: E741
    T: float = 1.0

    def grid(self, N: int, j0: int) -> Grid:
        return Grid(N=N, j0=j0, l=self.l, T=self.T)

    def alpha_nodes(self, grid: Grid) -> np.ndarray:
        a = np.broadcast_to(np.asarray(self.alpha(grid.x), dtype=float), (grid.N + 1,)).copy()
        bad = np.flatnonzero(~((a > 0) & (a < 1)))
        if bad.size:
            i = int(bad[0])
            raise ProblemDataError(f"alpha(x={float(grid.x[i])!r}) = {float(a[i])!r} is outside (0, 1)")
        return a


def sigma_threshold(alpha_min: float) -> float:
    """Smallest weight for which the scheme is unconditionally stable."""
    if not 0 < alpha_min <= 1:
        raise DomainError(f"alpha_min must lie in (0, 1], got {alpha_min!r}")
    return 1.0 / (3.0 - 2.0 ** (1.0 - alpha_min))


@dataclass(frozen=True)
class SolverConfig:
    """Grid plus time weight.  ``sigma="auto"`` picks the stability threshold
    for the smallest nodal order."""

    grid: Grid
    sigma: Union[float, str] = "auto"
    block: int = DEFAULT_BLOCK
    check_residual: bool = True

    def __post_init__(self):
        if isinstance(self.sigma, str):
            if self.sigma != "auto":
                raise DomainError(f"sigma must be 'auto' or a number, got {self.sigma!r}")
        elif not 0.0 <= self.sigma <= 1.0:
            raise DomainError(f"sigma must lie in [0, 1], got {self.sigma!r}")

    def resolve_sigma(self, problem: ProblemSpec) -> float:
        if self.sigma == "auto":
            return sigma_threshold(float(problem.alpha_nodes(self.grid).min()))
        return float(self.sigma)


@dataclass
class TridiagonalSystem:
    """Bands of a tridiagonal matrix; ``lower[0]`` and ``upper[-1]`` are unused."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "TridiagonalSystem":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))

    def __len__(self):
        return len(self.diag)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[1:] += self.lower[1:] * x[:-1]
        out[:-1] += self.upper[:-1] * x[1:]
        return out

    def dense(self) -> np.ndarray:
        n = len(self)
        A = np.diag(self.diag)
        A[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        A[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return A

    def off_diagonal_sum(self) -> np.ndarray:
        off = np.abs(self.lower).copy()
        off[0] = 0.0
        off[:-1] += np.abs(self.upper[:-1])
        return off

    def diagonally_dominant(self) -> bool:
        """Strict row diagonal dominance."""
        return bool(np.all(np.abs(self.diag) > self.off_diagonal_sum()))

    def relative_residual(self, x) -> float:
        """``||A x - b||_inf / max(||b||_inf, ||A||_inf ||x||_inf)`` (0 for a zero system)."""
        r = np.max(np.abs(self.matvec(x) - self.rhs))
        a_norm = np.max(np.abs(self.diag) + self.off_diagonal_sum())
        scale = max(np.max(np.abs(self.rhs)), a_norm * np.max(np.abs(x)))
        return float(r / scale) if scale > 0 else float(r)


@numba.njit(cache=True)
def _thomas(lower, diag, upper, rhs, out, pivot_tol):
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    piv = diag[0]
    if abs(piv) <= pivot_tol * (abs(diag[0]) + abs(upper[0])) or piv == 0.0:
        return 0
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * cp[i - 1]
        row = abs(diag[i]) + abs(lower[i]) + abs(upper[i])
        if abs(piv) <= pivot_tol * row or piv == 0.0:
            return i
        cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / piv
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return -1


def thomas_solve(system: TridiagonalSystem, pivot_tol: float = 1e-14) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    No pivoting; intended for diagonally dominant matrices.  Raises
    :class:`SingularSystemError` if a pivot is tiny relative to its row.
    """
    n = len(system)
    bands = [np.ascontiguousarray(b, dtype=float) for b in (system.lower, system.diag, system.upper, system.rhs)]
    if any(len(b) != n for b in bands):
        raise PreconditionError("band lengths differ")
    if n == 0:
        return np.zeros(0)
    upper = bands[2].copy()
    upper[-1] = 0.0
    out = np.empty(n)
    bad = _thomas(bands[0], bands[1], upper, bands[3], out, pivot_tol)
    if bad >= 0:
        raise SingularSystemError(f"near-zero pivot in row {bad}")
    return out


class _Scheme:
    """Per-grid data shared by every step of a march."""

    def __init__(self, problem: ProblemSpec, config: SolverConfig):
        grid = config.grid
        if abs(grid.l - problem.l) > 1e-14 * problem.l or abs(grid.T - problem.T) > 1e-14 * problem.T:
            raise PreconditionError("grid extent does not match the problem domain")
        self.problem = problem
        self.grid = grid
        self.sigma = config.resolve_sigma(problem)
        self.x = grid.x
        self.x_half = grid.x_half
        self.alpha = problem.alpha_nodes(grid)
        self.gamma2 = gamma(2.0 - self.alpha)
        powers = power_table(self.alpha, grid.j0 + 1)
        # w[i, m] = b_m(alpha_i) / (tau * Gamma(2 - alpha_i))
        scale = grid.tau ** (-self.alpha) / self.gamma2
        self.weights = scale[:, None] * (powers[:, 1:] - powers[:, :-1])
        self.c0 = self.weights[:, 0].copy()

    def coefficients(self, j: int):
        """``a`` at midpoints, ``d`` and ``phi`` at nodes, all at ``t_{j+1/2}``."""
        tb = self.grid.t_half(j)
        n = self.grid.N + 1
        a = np.broadcast_to(np.asarray(self.problem.k(self.x_half, tb), dtype=float), (n - 1,))
        d = np.broadcast_to(np.asarray(self.problem.q(self.x, tb), dtype=float), (n,))
        phi = np.broadcast_to(np.asarray(self.problem.f(self.x, tb), dtype=float), (n,))
        bad = np.flatnonzero(~(a > 0))
        if bad.size:
            i = int(bad[0])
            raise ProblemDataError(f"k(x={float(self.x_half[i])!r}, t={tb!r}) = {float(a[i])!r} is not positive")
        bad = np.flatnonzero(~(d >= 0))
        if bad.size:
            i = int(bad[0])
            raise ProblemDataError(f"q(x={float(self.x[i])!r}, t={tb!r}) = {float(d[i])!r} is negative")
        return a, d, phi

    def interior_operator(self, y, a, d):
        """``(a y_xbar)_x - d y`` at i = 1..N-1."""
        h2 = self.grid.h ** 2
        return (a[1:] * (y[2:] - y[1:-1]) - a[:-1] * (y[1:-1] - y[:-2])) / h2 - d[1:-1] * y[1:-1]

    def _interior_rows(self, system, y, load, a, d, phi):
        s = self.sigma
        h2 = self.grid.h ** 2
        c0 = self.c0[1:-1]
        system.lower[1:-1] = -s * a[:-1] / h2
        system.upper[1:-1] = -s * a[1:] / h2
        system.diag[1:-1] = c0 + s * ((a[:-1] + a[1:]) / h2 + d[1:-1])
        system.rhs[1:-1] = c0 * y[1:-1] - load[1:-1] + (1.0 - s) * self.interior_operator(y, a, d) + phi[1:-1]

    def dirichlet_system(self, j: int, y, load) -> TridiagonalSystem:
        bc = self.problem.bc
        a, d, phi = self.coefficients(j)
        system = TridiagonalSystem.zeros(self.grid.N + 1)
        self._interior_rows(system, y, load, a, d, phi)
        t_next = (j + 1) * self.grid.tau
        system.diag[0] = system.diag[-1] = 1.0
        system.rhs[0] = bc.mu1(t_next)
        system.rhs[-1] = bc.mu2(t_next)
        return system

    def robin_boundary(self, j: int, d, phi):
        """``(beta~1, beta~2, mu~1, mu~2)`` at ``t_{j+1/2}``."""
        bc = self.problem.bc
        tb = self.grid.t_half(j)
        h = self.grid.h
        b1, b2 = float(bc.beta1(tb)), float(bc.beta2(tb))
        for name, value in (("beta1", b1), ("beta2", b2)):
            if not value > 0:
                raise ProblemDataError(f"{name}(t={tb!r}) = {value!r} is not positive")
        return (
            b1 + 0.5 * h * d[0],
            b2 + 0.5 * h * d[-1],
            float(bc.mu1(tb)) + 0.5 * h * phi[0],
            float(bc.mu2(tb)) + 0.5 * h * phi[-1],
        )

    def robin_system(self, j: int, y, load) -> TridiagonalSystem:
        a, d, phi = self.coefficients(j)
        bt1, bt2, mt1, mt2 = self.robin_boundary(j, d, phi)
        s = self.sigma
        h = self.grid.h
        h2 = h * h
        system = TridiagonalSystem.zeros(self.grid.N + 1)
        self._interior_rows(system, y, load, a, d, phi)
        # i = 0: (a_1 y_x - beta~1 y) / (h/2)
        lam0 = 2.0 * a[0] * (y[1] - y[0]) / h2 - 2.0 * bt1 * y[0] / h
        system.diag[0] = self.c0[0] + s * (2.0 * a[0] / h2 + 2.0 * bt1 / h)
        system.upper[0] = -s * 2.0 * a[0] / h2
        system.rhs[0] = self.c0[0] * y[0] - load[0] + (1.0 - s) * lam0 + 2.0 * mt1 / h
        # i = N: (-a_N y_xbar - beta~2 y) / (h/2)
        lamN = -2.0 * a[-1] * (y[-1] - y[-2]) / h2 - 2.0 * bt2 * y[-1] / h
        system.diag[-1] = self.c0[-1] + s * (2.0 * a[-1] / h2 + 2.0 * bt2 / h)
        system.lower[-1] = -s * 2.0 * a[-1] / h2
        system.rhs[-1] = self.c0[-1] * y[-1] - load[-1] + (1.0 - s) * lamN + 2.0 * mt2 / h
        return system

    def system(self, j: int, y, load) -> TridiagonalSystem:
        if isinstance(self.problem.bc, Robin):
            return self.robin_system(j, y, load)
        return self.dirichlet_system(j, y, load)


def _direct_load(scheme: _Scheme, history: SolutionHistory, j: int) -> np.ndarray:
    if history.current < j:
        raise PreconditionError(f"history holds levels 0..{history.current}, need 0..{j}")
    diffs = np.diff(history.levels[: j + 1], axis=0).T
    return history_load_direct(scheme.weights, diffs, j)


def assemble_dirichlet_step(problem: ProblemSpec, config: SolverConfig, history: SolutionHistory, j: int) -> TridiagonalSystem:
    """System for level ``j + 1`` of the Dirichlet scheme given levels ``0..j``."""
    if not isinstance(problem.bc, Dirichlet):
        raise PreconditionError("problem does not carry Dirichlet data")
    scheme = _Scheme(problem, config)
    return scheme.dirichlet_system(j, history[j], _direct_load(scheme, history, j))


def assemble_robin_step(problem: ProblemSpec, config: SolverConfig, history: SolutionHistory, j: int) -> TridiagonalSystem:
    """System for level ``j + 1`` of the Robin scheme given levels ``0..j``."""
    if not isinstance(problem.bc, Robin):
        raise PreconditionError("problem does not carry Robin data")
    scheme = _Scheme(problem, config)
    return scheme.robin_system(j, history[j], _direct_load(scheme, history, j))


def initial_level(problem: ProblemSpec, grid: Grid) -> np.ndarray:
    return np.broadcast_to(np.asarray(problem.u0(grid.x), dtype=float), (grid.N + 1,)).copy()


def march(problem: ProblemSpec, config: SolverConfig, callback: Callable | None = None) -> SolutionHistory:
    """Run the scheme from ``u0`` to level ``j0``.

    ``callback(history)`` is invoked after each new level, read-only.
    Failures are raised as :class:`NumericalFailure` carrying the level
    being computed; bad coefficient data raises :class:`ProblemDataError`.
    """
    scheme = _Scheme(problem, config)
    grid = config.grid
    history = SolutionHistory.start(grid, initial_level(problem, grid))
    acc = HistoryAccumulator(scheme.weights, grid.j0, block=config.block)
    for j in range(grid.j0):
        y = history.levels[j]
        try:
            system = scheme.system(j, y, acc.load())
        except ProblemDataError as exc:
            raise ProblemDataError(f"level {j + 1}: {exc}") from exc
        try:
            y_next = thomas_solve(system)
        except SingularSystemError as exc:
            raise NumericalFailure(f"level {j + 1}: {exc}", level=j + 1) from exc
        if not np.all(np.isfinite(y_next)):
            raise NumericalFailure(f"level {j + 1}: non-finite solution", level=j + 1)
        if config.check_residual:
            res = system.relative_residual(y_next)
            if res > RESIDUAL_TOL:
                raise NumericalFailure(f"level {j + 1}: relative residual {res:.3e}", level=j + 1)
        history.append(y_next)
        acc.push(y_next - y)
        if callback is not None:
            callback(history)
    return history
