"""K-adaptability two-stage robust optimization solver."""

from ._kadapt import (
    BudgetError,
    Instance,
    ModelError,
    Policy,
    brute_force_solve,
    from_json,
    generate,
    load_instance,
    save_instance,
    second_stage_value,
    solve,
    solve_subproblem,
    with_zero_constraint_uncertainty,
)

__all__ = [
    "BudgetError",
    "Instance",
    "ModelError",
    "Policy",
    "brute_force_solve",
    "from_json",
    "generate",
    "load_instance",
    "save_instance",
    "second_stage_value",
    "solve",
    "solve_subproblem",
    "with_zero_constraint_uncertainty",
]
