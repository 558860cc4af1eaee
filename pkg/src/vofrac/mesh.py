"""Uniform space-time grids, difference quotients and discrete inner products."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError

__all__ = [
    "Grid",
    "SolutionHistory",
    "forward_diff",
    "backward_diff",
    "forward_diffs",
    "backward_diffs",
    "inner_open",
    "inner_halfopen",
    "inner_closed_half",
    "norm_open_sq",
    "norm_halfopen_sq",
    "norm_closed_half_sq",
    "gradient_norm_sq",
]


@dataclass(frozen=True)
class Grid:
    """Uniform mesh ``x_i = i h`` (i = 0..N) times ``t_j = j tau`` (j = 0..j0).

    Built from the cell counts and the domain size so that ``h N = l`` and
    ``tau j0 = T`` hold by construction.
    """

    N: int
    j0: int
    l: float = 1.0  # noqa: E741
    T: float = 1.0
    h: float = field(init=False)
    tau: float = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        if int(self.j0) != self.j0 or self.j0 < 1:
            raise DomainError(f"j0 must be an integer >= 1, got {self.j0!r}")
        if not (self.l > 0 and self.T > 0):
            raise DomainError("l and T must be positive")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "j0", int(self.j0))
        object.__setattr__(self, "h", self.l / self.N)
        object.__setattr__(self, "tau", self.T / self.j0)

    @classmethod
    def from_steps(cls, h: float, tau: float, l: float = 1.0, T: float = 1.0) -> "Grid":  # noqa: E741
        """Grid from step sizes; they must divide ``l`` and ``T`` evenly."""
        N = round(l / h)
        j0 = round(T / tau)
        if N < 1 or j0 < 1 or abs(N * h - l) > 1e-12 * l or abs(j0 * tau - T) > 1e-12 * T:
            raise DomainError(f"h={h!r}, tau={tau!r} do not divide l={l!r}, T={T!r}")
        return cls(N=N, j0=j0, l=l, T=T)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.j0 + 1) * self.tau

    @property
    def x_half(self) -> np.ndarray:
        """Cell midpoints ``x_{i-1/2}`` for i = 1..N."""
        return (np.arange(self.N) + 0.5) * self.h

    def t_half(self, j: int) -> float:
        return (j + 0.5) * self.tau


@dataclass
class SolutionHistory:
    """All computed time levels of a grid solution.

    ``levels[j]`` holds ``y^j`` on the spatial nodes.  Storage for every
    level up to ``j0`` is allocated up front; ``current`` is the last filled
    level.
    """

    grid: Grid
    levels: np.ndarray
    current: int = 0

    @classmethod
    def start(cls, grid: Grid, initial) -> "SolutionHistory":
        levels = np.zeros((grid.j0 + 1, grid.N + 1))
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (grid.N + 1,):
            raise PreconditionError("initial level must have N + 1 values")
        levels[0] = initial
        return cls(grid=grid, levels=levels, current=0)

    def append(self, y) -> None:
        if self.current >= self.grid.j0:
            raise PreconditionError("history is already complete")
        self.current += 1
        self.levels[self.current] = y

    def __getitem__(self, j: int) -> np.ndarray:
        if j < 0 or j > self.current:
            raise IndexError(f"level {j} not available (have 0..{self.current})")
        return self.levels[j]

    @property
    def complete(self) -> bool:
        return self.current == self.grid.j0

    @property
    def final(self) -> np.ndarray:
        return self.levels[self.current]

    def node_series(self, i: int) -> np.ndarray:
        """Time series ``y_i^0 .. y_i^current`` at one node."""
        return self.levels[: self.current + 1, i]


def _check_index(y, i, lo, hi):
    if not lo <= i <= hi:
        raise IndexError(f"node index {i} outside [{lo}, {hi}]")


def forward_diff(y, i: int, h: float) -> float:
    """``(y_{i+1} - y_i) / h`` for ``0 <= i <= N-1``."""
    _check_index(y, i, 0, len(y) - 2)
    return (y[i + 1] - y[i]) / h


def backward_diff(y, i: int, h: float) -> float:
    """``(y_i - y_{i-1}) / h`` for ``1 <= i <= N``."""
    _check_index(y, i, 1, len(y) - 1)
    return (y[i] - y[i - 1]) / h


def forward_diffs(y, h: float) -> np.ndarray:
    """Forward quotients at i = 0..N-1."""
    return np.diff(np.asarray(y, dtype=float)) / h


def backward_diffs(y, h: float) -> np.ndarray:
    """Backward quotients at i = 1..N (same numbers as the forward ones, shifted)."""
    return np.diff(np.asarray(y, dtype=float)) / h


def _pair(y, v):
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if y.shape != v.shape:
        raise PreconditionError(f"length mismatch: {y.shape} vs {v.shape}")
    return y, v


def inner_open(y, v, h: float) -> float:
    """``sum_{i=1}^{N-1} y_i v_i h``."""
    y, v = _pair(y, v)
    return float(np.dot(y[1:-1], v[1:-1]) * h)


def inner_halfopen(y, v, h: float) -> float:
    """``sum_{i=1}^{N} y_i v_i h``."""
    y, v = _pair(y, v)
    return float(np.dot(y[1:], v[1:]) * h)


def inner_closed_half(y, v, h: float) -> float:
    """Trapezoidal product: interior nodes with weight ``h``, end nodes ``h/2``."""
    y, v = _pair(y, v)
    return float((np.dot(y[1:-1], v[1:-1]) + 0.5 * (y[0] * v[0] + y[-1] * v[-1])) * h)


def norm_open_sq(y, h: float) -> float:
    return inner_open(y, y, h)


def norm_halfopen_sq(y, h: float) -> float:
    return inner_halfopen(y, y, h)


def norm_closed_half_sq(y, h: float) -> float:
    return inner_closed_half(y, y, h)


def gradient_norm_sq(y, h: float) -> float:
    """``||y_xbar]|^2 = sum_{i=1}^{N} (y_xbar,i)^2 h`` for a nodal function."""
    g = backward_diffs(y, h)
    return float(np.dot(g, g) * h)
