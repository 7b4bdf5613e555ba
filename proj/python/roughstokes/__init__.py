"""Stokes flow with rough Dirichlet data: meshes, solvers and convergence studies."""

from ._roughstokes import (
    ConfigError,
    IncompatibleDatumError,
    Mesh,
    PointOutsideDomainError,
    Solution,
    dorfler_mark,
    known_suites,
    mesh_from_text,
    parse_config,
    regularize,
    run_study,
    run_suite,
    solve,
    structured_mesh,
)

__all__ = [
    "ConfigError",
    "IncompatibleDatumError",
    "Mesh",
    "PointOutsideDomainError",
    "Solution",
    "dorfler_mark",
    "known_suites",
    "mesh_from_text",
    "parse_config",
    "regularize",
    "run_study",
    "run_suite",
    "solve",
    "structured_mesh",
]
