"""Power-free values of polynomials on affine quadrics."""

from ._core import (
    ArithmeticOverflow,
    BudgetExceeded,
    Cancelled,
    Context,
    InvariantViolation,
    Polynomial,
    PreconditionError,
    Problem,
    Quadric,
    ValidationError,
    compare,
    congruence_lattice,
    count_rfree,
    enumerate_points,
    is_locally_soluble,
    load_problem,
    mobius_sieve,
    point_density,
    real_density,
    rho,
    rho_linear,
    run_cli,
    singular_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
