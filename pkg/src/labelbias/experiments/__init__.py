"""End-to-end reproductions: the beta sweep on the stylized model, the rho
sweep on a synthetic arrest cohort, and care-management enrollment on the
released healthcare data."""
from .arrests import (
    ArrestConfig,
    generate_arrest_surrogate,
    locate_rho_crossover,
    run_rho_sweep,
    simulate_true_offense,
)
from .beta_sweep import analytic_model_rmse, default_beta_grid, run_beta_sweep
from .health import (
    ColumnMap,
    EnrollmentCurves,
    HealthDataset,
    default_column_map,
    load_health_dataset,
    run_enrollment,
)
from .results import SweepCell, SweepResult

__all__ = [
    "ArrestConfig",
    "ColumnMap",
    "EnrollmentCurves",
    "HealthDataset",
    "SweepCell",
    "SweepResult",
    "analytic_model_rmse",
    "default_beta_grid",
    "default_column_map",
    "generate_arrest_surrogate",
    "load_health_dataset",
    "locate_rho_crossover",
    "run_beta_sweep",
    "run_enrollment",
    "run_rho_sweep",
    "simulate_true_offense",
]
