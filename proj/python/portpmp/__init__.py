"""Optimal control of port-driven systems: indirect shooting and a direct reference solver."""

from ._core import (
    AnalyticSolution,
    CheapestStopParams,
    CompareReport,
    ControlProblem,
    DirectOptions,
    DirectSolution,
    Error,
    Extremal,
    NuMode,
    ParseError,
    SolverConfig,
    SolverFailed,
    UnboundedHamiltonian,
    ValidationError,
    analytic_classic,
    check_certificate,
    classic_problem,
    compare,
    load_problem,
    load_problem_file,
    maximize_hamiltonian,
    ported_problem,
    solve,
    solve_direct,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
