"""Weighted implicit difference schemes for variable-order time-fractional diffusion,
with runtime energy-estimate monitors and manufactured-solution convergence studies."""

from .fracops import caputo_quadrature, discrete_caputo, gamma, l1_weights
from .mesh import Grid, SolutionHistory
from .solver import Dirichlet, ProblemSpec, Robin, SolverConfig, march, sigma_threshold, thomas_solve
from .verify import coupled_study, get_problem, registry, reproduce_tables, temporal_study

__version__ = "0.1.0"

__all__ = [
    "Dirichlet",
    "Grid",
    "ProblemSpec",
    "Robin",
    "SolutionHistory",
    "SolverConfig",
    "caputo_quadrature",
    "coupled_study",
    "discrete_caputo",
    "gamma",
    "get_problem",
    "l1_weights",
    "march",
    "registry",
    "reproduce_tables",
    "sigma_threshold",
    "temporal_study",
    "thomas_solve",
]
