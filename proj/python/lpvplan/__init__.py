"""Python bindings for the lpvplan trajectory planner."""

from ._core import (
    LpvModel,
    RunSummary,
    SolveStatus,
    build_reference,
    build_visibility_graph,
    discretize,
    lpv_matrices,
    output_matrix,
    project_to_frenet,
    run_scenario,
    shortest_heading_path,
    solve_qp,
    vehicle_preset,
)

__all__ = [
    "LpvModel",
    "RunSummary",
    "SolveStatus",
    "build_reference",
    "build_visibility_graph",
    "discretize",
    "lpv_matrices",
    "output_matrix",
    "project_to_frenet",
    "run_scenario",
    "shortest_heading_path",
    "solve_qp",
    "vehicle_preset",
]
