"""Discrete energy inequalities, as executable checks.

Two families live here:

* pointwise inequalities for the L1 operator acting on one time series
  (``lemma2_margin_22``, ``lemma2_margin_23``, ``corollary2_margin``), each
  returning ``left - right`` so that a valid inequality gives a margin >= 0;
* a priori estimates for whole solutions of the Dirichlet and Robin
  schemes, evaluated level by level on a finished :class:`SolutionHistory`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ._history import causal_convolution
from .errors import DomainError, PreconditionError
from .fracops import discrete_caputo, gamma, power_table
from .mesh import SolutionHistory
from .solver import Dirichlet, ProblemSpec, Robin, SolverConfig, sigma_threshold

__all__ = [
    "lemma2_margin_22",
    "lemma2_margin_23",
    "corollary2_margin",
    "lemma_scale",
    "LemmaSweep",
    "lemma_sweep",
    "EstimateRecord",
    "EstimateReport",
    "monitor_dirichlet_estimate",
    "monitor_robin_estimate",
    "monitor_estimate",
    "REPORT_TOL",
]

REPORT_TOL = 1e-10
LEMMA_TOL = 1e-12


def _terms(y, alpha, tau, j):
    y = np.asarray(y, dtype=float)
    d = discrete_caputo(y, alpha, tau, j)
    d_sq = discrete_caputo(y * y, alpha, tau, j)
    g = gamma(2.0 - alpha)
    c22 = tau**alpha * g / 2.0
    c23 = tau**alpha * g / (2.0 * (2.0 - 2.0 ** (1.0 - alpha)))
    return y[j + 1], y[j], d, d_sq, c22, c23


def lemma2_margin_22(y, alpha: float, tau: float, j: int) -> float:
    """``y^{j+1} D y - D(y^2)/2 - tau^alpha Gamma(2-alpha)/2 (D y)^2`` (never negative)."""
    y1, _, d, d_sq, c22, _ = _terms(y, alpha, tau, j)
    return y1 * d - 0.5 * d_sq - c22 * d * d


def lemma2_margin_23(y, alpha: float, tau: float, j: int) -> float:
    """``y^j D y - D(y^2)/2 + tau^alpha Gamma(2-alpha)/(2(2-2^(1-alpha))) (D y)^2``."""
    _, y0, d, d_sq, _, c23 = _terms(y, alpha, tau, j)
    return y0 * d - 0.5 * d_sq + c23 * d * d


def corollary2_margin(y, alpha: float, tau: float, sigma: float, j: int) -> float:
    """Margin of the sigma-weighted inequality.

    Its coefficient ``((3 - 2^(1-alpha)) sigma - 1) / (2 (2 - 2^(1-alpha)))``
    splits exactly into ``sigma`` times the first lemma plus ``1 - sigma``
    times the second, which is how it is evaluated here.
    """
    if not 0.0 <= sigma <= 1.0:
        raise DomainError(f"sigma must lie in [0, 1], got {sigma!r}")
    return sigma * lemma2_margin_22(y, alpha, tau, j) + (1.0 - sigma) * lemma2_margin_23(y, alpha, tau, j)


def lemma_scale(y, alpha: float, tau: float, j: int) -> float:
    """Magnitude of the largest term in the lemma margins (at least 1)."""
    y1, y0, d, d_sq, c22, c23 = _terms(y, alpha, tau, j)
    return float(max(abs(y1 * d), abs(y0 * d), abs(0.5 * d_sq), c22 * d * d, c23 * d * d, 1.0))


@dataclass
class LemmaSweep:
    trials: int
    failures: dict[str, int]
    worst: dict[str, float]

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())


def lemma_sweep(trials: int, seed: int, max_len: int = 50, tol: float = LEMMA_TOL) -> LemmaSweep:
    """Random sequences (length 2..max_len, values in [-10, 10]), random order,
    step and weight; counts margins below ``-tol * scale``.

    ``worst`` records the most negative scaled margin seen per inequality.
    """
    rng = np.random.default_rng(seed)
    names = ("lemma2_margin_22", "lemma2_margin_23", "corollary2_margin")
    failures = dict.fromkeys(names, 0)
    worst = dict.fromkeys(names, np.inf)
    for _ in range(trials):
        n = int(rng.integers(2, max_len + 1))
        y = rng.uniform(-10.0, 10.0, n)
        alpha = float(rng.uniform(0.01, 0.99))
        tau = float(10.0 ** rng.uniform(-3.0, 0.0))
        sigma = float(rng.uniform(0.0, 1.0))
        j = n - 2
        scale = lemma_scale(y, alpha, tau, j)
        margins = {
            "lemma2_margin_22": lemma2_margin_22(y, alpha, tau, j),
            "lemma2_margin_23": lemma2_margin_23(y, alpha, tau, j),
            "corollary2_margin": corollary2_margin(y, alpha, tau, sigma, j),
        }
        for name, m in margins.items():
            worst[name] = min(worst[name], m / scale)
            if m < -tol * scale:
                failures[name] += 1
    return LemmaSweep(trials, failures, worst)


@dataclass
class EstimateRecord:
    level: int
    lhs: float
    rhs: float
    margin: float


@dataclass
class EstimateReport:
    """Per-level sides of an a priori estimate; ``margin = rhs - lhs``."""

    kind: str
    records: list[EstimateRecord] = field(default_factory=list)
    constants: dict[str, float] = field(default_factory=dict)
    tol: float = REPORT_TOL

    def record_ok(self, r: EstimateRecord) -> bool:
        return r.margin >= -self.tol * max(abs(r.lhs), abs(r.rhs), 1.0)

    @property
    def passed(self) -> bool:
        return all(self.record_ok(r) for r in self.records)

    @property
    def violations(self) -> list[EstimateRecord]:
        return [r for r in self.records if not self.record_ok(r)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "lhs", "rhs", "margin"])
        for r in self.records:
            writer.writerow([r.level, f"{r.lhs:.17g}", f"{r.rhs:.17g}", f"{r.margin:.17g}"])
        return buf.getvalue()


class _Sampled:
    """Problem data at the points the scheme samples, for a finished history."""

    def __init__(self, history: SolutionHistory, problem: ProblemSpec, config: SolverConfig):
        if not history.complete:
            raise PreconditionError("history is incomplete")
        grid = history.grid
        self.grid = grid
        self.sigma = config.resolve_sigma(problem)
        self.alpha = problem.alpha_nodes(grid)
        threshold = sigma_threshold(float(self.alpha.min()))
        if self.sigma < threshold * (1.0 - 1e-15):
            raise PreconditionError(f"sigma={self.sigma!r} is below the stability threshold {threshold!r}")
        x, xh = grid.x, grid.x_half
        n = grid.N + 1
        t_half = (np.arange(grid.j0) + 0.5) * grid.tau
        self.t_half = t_half
        self.k_min = min(float(np.min(np.broadcast_to(problem.k(xh, t), (n - 1,)))) for t in t_half)
        self.phi = np.array([np.broadcast_to(problem.f(x, t), (n,)) for t in t_half], dtype=float)
        self.inv_gamma = 1.0 / gamma(2.0 - self.alpha)
        # t_m^(1 - alpha_i) for m = 0..j0
        self.t_pow = grid.tau ** (1.0 - self.alpha)[:, None] * power_table(self.alpha, grid.j0)
        self.levels = history.levels

    def time_term(self, node_weights):
        """``sum_i node_weights_i / Gamma_i * sum_{j'<=j} (t_{j-j'+1} - t_{j-j'})^(1-a_i) (y_i^{j'+1})^2``
        for every ``j``; the column index is ``j``."""
        b = np.diff(self.t_pow, axis=1)
        sq = (self.levels[1:] ** 2).T
        conv = causal_convolution(b, np.ascontiguousarray(sq))
        return (node_weights * self.inv_gamma) @ conv

    def initial_term(self, node_weights):
        u0sq = self.levels[0] ** 2
        return (node_weights * self.inv_gamma * u0sq) @ self.t_pow[:, 1:]

    def weighted_levels(self):
        """``sigma y^{j+1} + (1 - sigma) y^j`` for j = 0..j0-1."""
        s = self.sigma
        return s * self.levels[1:] + (1.0 - s) * self.levels[:-1]

    def phi_interior_norm_sq(self):
        h = self.grid.h
        return np.sum(self.phi[:, 1:-1] ** 2, axis=1) * h

    def grad_norm_sq(self, ys):
        h = self.grid.h
        g = np.diff(ys, axis=1) / h
        return np.sum(g * g, axis=1) * h


def _report(kind, lhs, rhs, constants):
    report = EstimateReport(kind=kind, constants=constants)
    for j, (a, b) in enumerate(zip(lhs, rhs)):
        report.records.append(EstimateRecord(level=j + 1, lhs=float(a), rhs=float(b), margin=float(b - a)))
    return report


def monitor_dirichlet_estimate(history: SolutionHistory, problem: ProblemSpec, config: SolverConfig) -> EstimateReport:
    """Level-by-level check of the Dirichlet energy estimate.

    Requires homogeneous boundary values.  The time term and the initial term
    use the open product over interior nodes, the gradient the half-open
    norm; ``c1`` is the smallest sampled ``k``.
    """
    bc = problem.bc
    if not isinstance(bc, Dirichlet):
        raise PreconditionError("Dirichlet estimate needs Dirichlet data")
    grid = history.grid
    for t in grid.t:
        if bc.mu1(t) != 0 or bc.mu2(t) != 0:
            raise PreconditionError(f"boundary data are not homogeneous at t={t!r}")
    data = _Sampled(history, problem, config)
    h = grid.h
    c1 = data.k_min
    weights = np.zeros(grid.N + 1)
    weights[1:-1] = h
    grad = np.cumsum(data.grad_norm_sq(data.weighted_levels())) * grid.tau
    force = np.cumsum(data.phi_interior_norm_sq()) * grid.tau
    lhs = data.time_term(weights) + c1 * grad
    rhs = grid.l**2 / (2.0 * c1) * force + data.initial_term(weights)
    return _report("dirichlet", lhs, rhs, {"c1": c1, "sigma": data.sigma})


def monitor_robin_estimate(history: SolutionHistory, problem: ProblemSpec, config: SolverConfig) -> EstimateReport:
    """Level-by-level check of the Robin energy estimate.

    Uses the trapezoidal product ``[., .]`` for the time and initial terms,
    ``gamma = min(c1, beta0)`` and ``delta = max(1 + l, l^2)``.
    """
    bc = problem.bc
    if not isinstance(bc, Robin):
        raise PreconditionError("Robin estimate needs Robin data")
    grid = history.grid
    data = _Sampled(history, problem, config)
    h, l = grid.h, grid.l  # noqa: E741
    beta1 = np.array([float(bc.beta1(t)) for t in data.t_half])
    beta2 = np.array([float(bc.beta2(t)) for t in data.t_half])
    beta0 = float(min(beta1.min(), beta2.min()))
    if not beta0 > 0:
        raise PreconditionError("Robin coefficients must be positive")
    c1 = data.k_min
    gam = min(c1, beta0)
    delta = max(1.0 + l, l * l)
    mu1 = np.array([float(bc.mu1(t)) for t in data.t_half]) + 0.5 * h * data.phi[:, 0]
    mu2 = np.array([float(bc.mu2(t)) for t in data.t_half]) + 0.5 * h * data.phi[:, -1]
    weights = np.full(grid.N + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    ys = data.weighted_levels()
    trace = data.grad_norm_sq(ys) + ys[:, 0] ** 2 + ys[:, -1] ** 2
    lhs = data.time_term(weights) + gam * np.cumsum(trace) * grid.tau
    force = mu1**2 + mu2**2 + data.phi_interior_norm_sq()
    rhs = delta / gam * np.cumsum(force) * grid.tau + data.initial_term(weights)
    return _report("robin", lhs, rhs, {"c1": c1, "beta0": beta0, "gamma": gam, "delta": delta, "sigma": data.sigma})


def monitor_estimate(history: SolutionHistory, problem: ProblemSpec, config: SolverConfig) -> EstimateReport:
    """Dispatch on the boundary-condition type."""
    if isinstance(problem.bc, Robin):
        return monitor_robin_estimate(history, problem, config)
    return monitor_dirichlet_estimate(history, problem, config)
