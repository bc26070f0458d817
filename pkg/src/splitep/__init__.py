"""Splitting gradient solver for monotone equilibrium problems."""

from .core import (
    Affine,
    Box,
    BoxSum,
    Component,
    ContractError,
    DiagonalQuadratic,
    GeneralQuadratic,
    GenericSmooth,
    InfeasibleError,
    SeparableLogBarrier,
    SplitBifunction,
    WholeSpace,
    Zero,
)
from .problems import load_problem, problem_from_dict
from .schedules import CustomSchedule, HarmonicScale
from .solver import Mode, SolverConfig, SolverError, Status, run
from .verify import primal_residual

__all__ = [
    "Affine", "Box", "BoxSum", "Component", "ContractError", "CustomSchedule", "DiagonalQuadratic",
    "GeneralQuadratic", "GenericSmooth", "HarmonicScale", "InfeasibleError", "Mode",
    "SeparableLogBarrier", "SolverConfig", "SolverError", "SplitBifunction", "Status", "WholeSpace",
    "Zero", "load_problem", "primal_residual", "problem_from_dict", "run",
]
