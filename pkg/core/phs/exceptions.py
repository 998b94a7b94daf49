"""
PHS Lab v1.0 — 예외 계층

라이브러리에서 발생하는 모든 오류는 PHSError 하위 클래스입니다.
CLI는 예외 종류로 종료 코드를 결정합니다 (설정 오류 1, 솔버 실패 2).
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np


class PHSError(Exception):
    """PHS Lab 공통 기반 예외"""


class ConfigurationError(PHSError, ValueError):
    """잘못된 설정: 특이 질량행렬, 음수 분할 계수, 포트 차원 불일치 등"""


class ContractViolation(PHSError, ValueError):
    """입력 계약 위반: 차원 불일치, 비유한 상태, 단계 데이터 누락"""


class SolverFailure(PHSError, RuntimeError):
    """암시적 방정식 솔버가 max_iterations 안에 수렴하지 못함"""

    def __init__(
        self,
        message: str,
        best_iterate: np.ndarray,
        residual_norm: float,
        iterations: int,
    ):
        super().__init__(message)
        self.best_iterate = np.asarray(best_iterate, dtype=float).copy()
        self.residual_norm = float(residual_norm)
        self.iterations = int(iterations)


class StepFailure(PHSError, RuntimeError):
    """적분 중 특정 스텝에서 솔버 실패. 부분 궤적을 함께 보관"""

    def __init__(
        self,
        step_index: int,
        cause: SolverFailure,
        trajectory: Optional[Any] = None,
    ):
        super().__init__(
            f"step {step_index} failed: {cause} "
            f"(residual={cause.residual_norm:.3e}, iterations={cause.iterations})"
        )
        self.step_index = int(step_index)
        self.cause = cause
        self.trajectory = trajectory

    @property
    def residual_norm(self) -> float:
        return self.cause.residual_norm
