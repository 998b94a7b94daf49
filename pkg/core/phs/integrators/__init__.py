"""
PHS Lab v1.0 — 적분기 (integrators)

이산 그래디언트 / AVF-PHS / 콜로케이션 / 분할 / 비교용 고전 방법과 암시적 솔버.
"""

from core.phs.integrators.collocation import CollocationTableau, step_collocation
from core.phs.integrators.config import SolverKind, StepperConfig
from core.phs.integrators.disgrad_step import step_avfphs, step_disgrad
from core.phs.integrators.integrate import STEPPED_METHODS, integrate, integrate_method, make_stepper
from core.phs.integrators.reference import ReferenceMethod, reference_stepper, step_reference
from core.phs.integrators.solver import SolverResult, solve_implicit
from core.phs.integrators.splitting import (
    SplittingSpec,
    integrate_splitting,
    splitting_substeps,
    step_splitting,
)

__all__ = [
    "CollocationTableau",
    "ReferenceMethod",
    "STEPPED_METHODS",
    "SolverKind",
    "SolverResult",
    "SplittingSpec",
    "StepperConfig",
    "integrate",
    "integrate_method",
    "integrate_splitting",
    "make_stepper",
    "reference_stepper",
    "solve_implicit",
    "splitting_substeps",
    "step_avfphs",
    "step_collocation",
    "step_disgrad",
    "step_reference",
    "step_splitting",
]
