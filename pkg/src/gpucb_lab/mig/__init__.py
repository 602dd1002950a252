"""Maximum-information-gain machinery on spheres and balls."""

from .bounds import (
    DEFAULT_ABSOLUTE_C,
    MigBound,
    analytic_tail,
    best_general_bound,
    c_d,
    mig_bound_general,
    mig_bound_matern,
    mig_bound_radius,
    mig_bound_se,
    mig_bound_theorem,
)
from .eigen import (
    EigenRow,
    eigen_bound,
    eigen_bound_valid,
    eigen_table,
    funk_hecke_eigenvalue,
    matern_eigen_bound,
    mercer_series,
    se_eigen_bound,
    sphere_profile,
)
from .greedy import (
    GreedyResult,
    brute_force_mig,
    circle_points,
    greedy_mig,
    sphere_fibonacci_points,
    sphere_lift,
)
from .harmonics import (
    harmonic_count,
    harmonic_count_bound,
    harmonic_dim,
    harmonic_dim_bound,
    legendre,
    sphere_area,
)

__all__ = [
    "DEFAULT_ABSOLUTE_C",
    "EigenRow",
    "GreedyResult",
    "MigBound",
    "analytic_tail",
    "best_general_bound",
    "brute_force_mig",
    "c_d",
    "circle_points",
    "eigen_bound",
    "eigen_bound_valid",
    "eigen_table",
    "funk_hecke_eigenvalue",
    "greedy_mig",
    "harmonic_count",
    "harmonic_count_bound",
    "harmonic_dim",
    "harmonic_dim_bound",
    "legendre",
    "matern_eigen_bound",
    "mercer_series",
    "mig_bound_general",
    "mig_bound_matern",
    "mig_bound_radius",
    "mig_bound_se",
    "mig_bound_theorem",
    "se_eigen_bound",
    "sphere_area",
    "sphere_fibonacci_points",
    "sphere_lift",
    "sphere_profile",
]
