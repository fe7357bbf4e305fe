"""Interferometry of a superposed meson: area-law phases and their cross-checks."""
from .dynamic import (
    BranchState,
    DynamicConfig,
    InterferenceResult,
    adiabaticity_margin,
    gamma_phase_difference,
    interference,
    run_dynamic,
    solve_branch,
    solve_branch_ode,
)
from .errors import (
    CollisionError,
    ConstructionError,
    ContractError,
    MesonLoopError,
    NonIdentifiableError,
    NumericalError,
    PhysicsDomainError,
    ValidationError,
)
from .estimation import (
    FitResult,
    MeasurementRecord,
    area_law_test,
    fit_string_tension,
    simulate_counts,
    simulate_counts_from_areas,
)
from .kernels import BACKEND
from .oracle import Grid, Mode, default_grid, evolve_branch, oracle_check
from .static import StaticConfig, TwoBranchState, evolve_static, ramsey, run_static
from .trajectory import (
    PathPair,
    QuinticBumpHold,
    SampledSpline,
    SineFourthBump,
    enclosed_area,
    equal_area_family,
    random_pair,
    validate,
)
from .wilson import Rule, amplitude_correspondence, convergence_table, discretize, loop_expectation

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
