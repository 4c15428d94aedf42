"""Graph semi-supervised solvers on random geometric graphs with
heat-kernel smoothing and a continuum Poisson reference solver."""

from .geometry import (
    Box,
    Disk,
    build_graph,
    closest_point,
    load_points,
    make_density,
    make_kernel,
    sample_points,
    save_points,
)
from .graph_core import (
    Graph,
    GraphFunction,
    LaplacianKind,
    dirichlet_energy,
    energy_discrete,
    graph_delta,
    inner,
    laplacian_apply,
    load_graph,
    pnorm,
    save_graph,
    weighted_mean,
)
from .heat_kernel import (
    heat_column,
    heat_convolve,
    psi_table,
    repeated_average,
    rho_hat,
    scale_constants,
    smooth_poisson,
)
from .poisson_solver import (
    SourceSpec,
    assemble_source,
    solve_graph_poisson,
    solve_laplace_learning,
    solve_pwll,
)
from .continuum_ref import (
    GridFunction,
    build_grid,
    greens_function,
    interpolate_at,
    solve_weighted_poisson,
)
from .experiments import (
    ExperimentConfig,
    RUNNERS,
    demo_two_point,
    fit_slope,
    run_convergence,
    run_heat_asymptotics,
    run_mollification_rate,
)

__all__ = [
    "Box",
    "Disk",
    "ExperimentConfig",
    "Graph",
    "GraphFunction",
    "GridFunction",
    "LaplacianKind",
    "RUNNERS",
    "SourceSpec",
    "assemble_source",
    "build_graph",
    "build_grid",
    "closest_point",
    "demo_two_point",
    "dirichlet_energy",
    "energy_discrete",
    "fit_slope",
    "graph_delta",
    "greens_function",
    "heat_column",
    "heat_convolve",
    "inner",
    "interpolate_at",
    "laplacian_apply",
    "load_graph",
    "load_points",
    "make_density",
    "make_kernel",
    "pnorm",
    "psi_table",
    "repeated_average",
    "rho_hat",
    "run_convergence",
    "run_heat_asymptotics",
    "run_mollification_rate",
    "sample_points",
    "save_graph",
    "save_points",
    "scale_constants",
    "smooth_poisson",
    "solve_graph_poisson",
    "solve_laplace_learning",
    "solve_pwll",
    "solve_weighted_poisson",
    "weighted_mean",
]

__version__ = "0.1.0"
