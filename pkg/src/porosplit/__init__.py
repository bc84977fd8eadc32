"""Space-time finite element solver for quasi-static poroelasticity
with tuned fixed-stress iterative coupling."""

from .biot import (
    BoundaryCondition,
    MaterialParams,
    ScenarioConfig,
    TimePolynomial,
    benchmark_scenario,
    contraction_factor,
    lame_from_engineering,
    load_scenario,
    optimal_tuning,
    parse_scenario,
    save_scenario,
    scenario_to_text,
)
from .mesh import Mesh, build_lshape_mesh, build_rectangle_mesh, refine_uniform
from .solver import (
    Discretization,
    IterationReport,
    RunResult,
    SlabState,
    build_discretization,
    contraction_estimate,
    error_norms,
    fixed_stress_slab,
    flow_half_step,
    march,
    mechanics_half_step,
    monolithic_slab,
    run_simulation,
)
from .spaces import FeSpaces, build_displacement_space, build_flux_space, build_pressure_space
from .time_galerkin import TimeSlabBasis, build_basis, build_cgp_basis, build_dg_basis, gauss_nodes

__version__ = "0.1.0"
