"""
PHS Lab v1.0 — 스텝 설정 모델

StepperConfig는 고정 스텝 h와 암시적 솔버 제어값을 담는 불변 pydantic 모델입니다.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from core.config import QUADRATURE_CONFIG, SOLVER_CONFIG


class SolverKind(str, Enum):
    FIXED_POINT = "fixed-point"
    NEWTON = "newton-numeric-jacobian"


class StepperConfig(BaseModel):
    """스텝 크기와 솔버 제어"""

    model_config = ConfigDict(frozen=True)

    step_size: float = Field(..., gt=0.0)
    solver_tolerance: float = Field(SOLVER_CONFIG["tolerance"], gt=0.0)
    max_iterations: int = Field(SOLVER_CONFIG["max_iterations"], ge=1)
    solver_kind: SolverKind = SolverKind.FIXED_POINT
    stall_limit: int = Field(SOLVER_CONFIG["stall_limit"], ge=1)
    quadrature_nodes: int = Field(QUADRATURE_CONFIG["avf_nodes"], ge=1)

    def with_step(self, h: float) -> "StepperConfig":
        return self.model_copy(update={"step_size": h})
