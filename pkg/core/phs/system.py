"""
PHS Lab v1.0 — 포트-해밀토니안 시스템 모델

    M ẋ = B(x)∇H(x) + G(x)u,    y = G(x)ᵀ M⁻¹ ∇H(x)

시스템, 제어 법칙, 스텝 기록, 궤적 타입과 점별(pointwise) 평가 함수.
모든 타입은 생성 후 불변이며 콜백은 순수 함수여야 합니다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from core.config import AUDIT_CONFIG
from core.phs.exceptions import ConfigurationError, ContractViolation

logger = logging.getLogger("phs.system")

StateVector = npt.NDArray[np.float64]
ScalarMap = Callable[[np.ndarray], float]
VectorMap = Callable[[np.ndarray], np.ndarray]
MatrixMap = Callable[[np.ndarray], np.ndarray]


def as_state(x, dim: int, name: str = "state") -> StateVector:
    """길이 dim의 유한 float 벡터로 변환 (위반 시 ContractViolation)"""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ContractViolation(f"{name} must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return arr


def _as_input(u, port_dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if port_dim == 0 and arr.size == 0:
        return np.zeros(0)
    if arr.shape != (port_dim,):
        raise ContractViolation(f"input must have shape ({port_dim},), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PortHamiltonianSystem:
    """입출력 포트-해밀토니안 시스템 (H, ∇H, B(x), G(x), M)

    dissipation이 주어지면 B = J + S 분해에서 대칭 음반정치 부분 S(x)를 뜻합니다.
    averaged_gradient는 사용자가 적분해 둔 AVF 그래디언트 ∫₀¹∇H(x+α(x′−x))dα.
    """

    state_dim: int
    port_dim: int
    hamiltonian: ScalarMap
    gradient: VectorMap
    structure: MatrixMap
    input_matrix: MatrixMap
    mass_matrix: Optional[np.ndarray] = None
    dissipation: Optional[MatrixMap] = None
    averaged_gradient: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = "custom"
    _mass_factor: Optional[tuple] = field(init=False, repr=False, default=None)
    _mass_error: Optional[str] = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.state_dim < 1:
            raise ConfigurationError(f"state_dim must be positive, got {self.state_dim}")
        if self.port_dim < 0:
            raise ConfigurationError(f"port_dim must be non-negative, got {self.port_dim}")
        if self.mass_matrix is None:
            return
        M = np.asarray(self.mass_matrix, dtype=float)
        n = self.state_dim
        if M.shape != (n, n):
            raise ConfigurationError(f"mass_matrix must be {n}x{n}, got {M.shape}")
        object.__setattr__(self, "mass_matrix", M)
        if not np.allclose(M, M.T, rtol=0.0, atol=1e-14 * (1.0 + np.abs(M).max())):
            object.__setattr__(self, "_mass_error", "mass_matrix is not symmetric")
            return
        try:
            object.__setattr__(self, "_mass_factor", cho_factor(M))
        except LinAlgError as exc:
            object.__setattr__(self, "_mass_error", f"mass_matrix not positive definite: {exc}")

    # ─── 평가 헬퍼 ───
    @property
    def mass_matrix_ok(self) -> bool:
        return self._mass_error is None

    def solve_mass(self, v: np.ndarray) -> np.ndarray:
        """M⁻¹v (벡터 또는 행렬), M이 없으면 v 그대로"""
        if self._mass_error is not None:
            raise ConfigurationError(self._mass_error)
        if self._mass_factor is None:
            return v
        return cho_solve(self._mass_factor, v)

    def structure_at(self, x: np.ndarray) -> np.ndarray:
        B = np.asarray(self.structure(x), dtype=float)
        if B.shape != (self.state_dim, self.state_dim):
            raise ContractViolation(f"structure returned shape {B.shape}")
        return B

    def input_matrix_at(self, x: np.ndarray) -> np.ndarray:
        G = np.asarray(self.input_matrix(x), dtype=float)
        if G.ndim == 1:
            G = G[:, None]
        if G.shape != (self.state_dim, self.port_dim):
            raise ContractViolation(f"input_matrix returned shape {G.shape}")
        return G

    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.gradient(x), dtype=float)

    def energy(self, x: np.ndarray) -> float:
        return float(self.hamiltonian(x))


# ============================================================
# 제어 법칙
# ============================================================

class ControlMode(str, Enum):
    STATE_FEEDBACK = "state-feedback"
    OUTPUT_FEEDBACK = "output-feedback"
    OPEN_LOOP = "open-loop"
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """피드백 법칙

    - output-feedback: u = −φ(y)
    - state-feedback: u = φ(e), e는 코에너지 ∇H (이산 시에는 ∇̄H)
    - open-loop: u = φ(t)
    - zero: u = 0
    """

    mode: ControlMode
    phi: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", ControlMode(self.mode))
        if self.mode is not ControlMode.ZERO and self.phi is None:
            raise ConfigurationError(f"control mode {self.mode.value} requires phi")

    @classmethod
    def zero(cls) -> "ControlLaw":
        return cls(ControlMode.ZERO)

    @classmethod
    def output_feedback(cls, phi: Callable[[np.ndarray], np.ndarray]) -> "ControlLaw":
        return cls(ControlMode.OUTPUT_FEEDBACK, phi)

    @classmethod
    def state_feedback(cls, kappa: Callable[[np.ndarray], np.ndarray]) -> "ControlLaw":
        return cls(ControlMode.STATE_FEEDBACK, kappa)

    @classmethod
    def open_loop(cls, signal: Callable[[float], np.ndarray]) -> "ControlLaw":
        return cls(ControlMode.OPEN_LOOP, signal)

    @property
    def is_damping(self) -> bool:
        return self.mode in (ControlMode.OUTPUT_FEEDBACK, ControlMode.ZERO)

    def evaluate(self, y: np.ndarray, effort: np.ndarray, t: float, port_dim: int) -> np.ndarray:
        """출력 y, 코에너지 effort, 시각 t에서의 입력 u"""
        if self.mode is ControlMode.ZERO:
            u = np.zeros(port_dim)
        elif self.mode is ControlMode.OUTPUT_FEEDBACK:
            u = -np.asarray(self.phi(y), dtype=float)
        elif self.mode is ControlMode.STATE_FEEDBACK:
            u = np.asarray(self.phi(effort), dtype=float)
        else:
            u = np.asarray(self.phi(t), dtype=float)
        return _as_input(u, port_dim)

    def passivity_margin(self, samples: Sequence[np.ndarray]) -> float:
        """min yᵀφ(y)/‖y‖² over y ≠ 0 (output-feedback 전용)"""
        if self.mode is not ControlMode.OUTPUT_FEEDBACK:
            raise ConfigurationError("passivity_margin applies to output-feedback laws only")
        margins = []
        for y in samples:
            y = np.atleast_1d(np.asarray(y, dtype=float))
            ny = float(y @ y)
            if ny > 0.0:
                margins.append(float(y @ np.atleast_1d(self.phi(y))) / ny)
        if not margins:
            raise ContractViolation("passivity_margin needs at least one non-zero sample")
        return min(margins)


# ============================================================
# 스텝 기록 / 궤적
# ============================================================

@dataclass(frozen=True, eq=False)
class StepRecord:
    """스텝 x_{n−1} → x_n 기록 (상태, 에너지, 단계 출력/입력, 공급 에너지)"""

    index: int
    time: float
    state: StateVector
    energy: float
    stage_outputs: tuple
    stage_inputs: tuple
    stage_weights: np.ndarray
    supply: float
    solver_iterations: int
    dissipation: float = 0.0
    discrete_gradients: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.stage_weights, dtype=float)
        object.__setattr__(self, "stage_weights", w)
        if len(self.stage_outputs) != len(self.stage_inputs):
            raise ContractViolation("stage_outputs and stage_inputs differ in length")
        if w.size != len(self.stage_outputs):
            raise ContractViolation("stage_weights must match the number of stages")
        if w.size:
            if np.any(w <= 0.0):
                raise ContractViolation("stage_weights must be positive")
            if abs(w.sum() - 1.0) > 1e-14:
                raise ContractViolation(f"stage_weights sum to {w.sum():.17g}, expected 1")

    @property
    def has_stages(self) -> bool:
        return len(self.stage_outputs) > 0

    @property
    def mean_output(self) -> np.ndarray:
        return sum(b * y for b, y in zip(self.stage_weights, self.stage_outputs))

    @property
    def mean_input(self) -> np.ndarray:
        return sum(b * u for b, u in zip(self.stage_weights, self.stage_inputs))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """x_0 + 스텝 기록 1..N"""

    records: tuple
    step_size: float
    method_name: str
    initial_state: StateVector
    initial_energy: float
    initial_output: np.ndarray
    initial_input: np.ndarray
    solver_tolerance: float
    initial_time: float = 0.0

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ContractViolation(f"step_size must be positive, got {self.step_size}")
        previous = 0
        for rec in self.records:
            if rec.index <= previous:
                raise ContractViolation("record indices must be strictly increasing")
            expected = self.initial_time + rec.index * self.step_size
            if abs(rec.time - expected) > 1e-9 * max(1.0, abs(expected)):
                raise ContractViolation(f"record {rec.index} time {rec.time} != {expected}")
            previous = rec.index

    def __len__(self) -> int:
        return len(self.records)

    @property
    def states(self) -> np.ndarray:
        return np.vstack([self.initial_state] + [r.state for r in self.records])

    @property
    def energies(self) -> np.ndarray:
        return np.array([self.initial_energy] + [r.energy for r in self.records])

    @property
    def times(self) -> np.ndarray:
        return np.array([self.initial_time] + [r.time for r in self.records])

    @property
    def final_state(self) -> StateVector:
        return self.records[-1].state if self.records else self.initial_state

    @property
    def total_iterations(self) -> int:
        return sum(r.solver_iterations for r in self.records)


# ============================================================
# 점별 평가
# ============================================================

def eval_vector_field(sys: PortHamiltonianSystem, x, u) -> StateVector:
    """M⁻¹(B(x)∇H(x) + G(x)u)"""
    x = as_state(x, sys.state_dim)
    u = _as_input(u, sys.port_dim)
    rhs = sys.structure_at(x) @ sys.gradient_at(x) + sys.input_matrix_at(x) @ u
    return sys.solve_mass(rhs)


def eval_output(sys: PortHamiltonianSystem, x) -> np.ndarray:
    """y = G(x)ᵀ M⁻¹ ∇H(x)"""
    x = as_state(x, sys.state_dim)
    return sys.input_matrix_at(x).T @ sys.solve_mass(sys.gradient_at(x))


def energy_rate(sys: PortHamiltonianSystem, x, u) -> float:
    """공급 전력 yᵀu (무손실 구조에서 Ḣ와 같음)"""
    u = _as_input(u, sys.port_dim)
    return float(eval_output(sys, x) @ u)


def closed_loop_input(sys: PortHamiltonianSystem, law: ControlLaw, x, t: float = 0.0) -> np.ndarray:
    x = as_state(x, sys.state_dim)
    return law.evaluate(eval_output(sys, x), sys.gradient_at(x), t, sys.port_dim)


def closed_loop_field(sys: PortHamiltonianSystem, law: ControlLaw) -> Callable[[float, np.ndarray], np.ndarray]:
    """폐루프 벡터장 f(t, x). 참조 방법과 오라클이 사용"""

    def f(t: float, x: np.ndarray) -> np.ndarray:
        return eval_vector_field(sys, x, closed_loop_input(sys, law, x, t))

    return f


# ============================================================
# 시스템 검증
# ============================================================

@dataclass
class ValidationReport:
    """validate_system 결과"""

    skew_defect: float
    conservative_skew_defect: float
    gradient_mismatch: float
    mass_matrix_ok: bool
    dissipation_semidefinite: bool
    structure_scale: float
    n_samples: int
    law_origin_value: Optional[float] = None

    @property
    def is_skew(self) -> bool:
        return self.skew_defect <= AUDIT_CONFIG["skew_tolerance"] * (1.0 + self.structure_scale)

    @property
    def conservative_part_skew(self) -> bool:
        return self.conservative_skew_defect <= AUDIT_CONFIG["skew_tolerance"] * (1.0 + self.structure_scale)

    @property
    def gradient_consistent(self) -> bool:
        return self.gradient_mismatch <= AUDIT_CONFIG["gradient_tolerance"]

    @property
    def law_zero_at_origin(self) -> bool:
        """φ(0) = 0 (검사하지 않았으면 True)"""
        if self.law_origin_value is None:
            return True
        return self.law_origin_value <= AUDIT_CONFIG["skew_tolerance"]


def _fd_gradient(H: ScalarMap, x: np.ndarray) -> np.ndarray:
    g = np.empty_like(x)
    for k in range(x.size):
        delta = AUDIT_CONFIG["fd_gradient_step"] * (1.0 + abs(x[k]))
        e = np.zeros_like(x)
        e[k] = delta
        g[k] = (H(x + e) - H(x - e)) / (2.0 * delta)
    return g


def _law_origin_value(sys: PortHamiltonianSystem, law: Optional[ControlLaw]) -> Optional[float]:
    # 피드백 법칙만 해당: 출력 피드백은 φ(0_m), 상태 피드백은 φ(0_n)
    if law is None or law.mode not in (ControlMode.OUTPUT_FEEDBACK, ControlMode.STATE_FEEDBACK):
        return None
    dim = sys.port_dim if law.mode is ControlMode.OUTPUT_FEEDBACK else sys.state_dim
    value = np.atleast_1d(np.asarray(law.phi(np.zeros(dim)), dtype=float))
    return float(np.max(np.abs(value))) if value.size else 0.0


def validate_system(sys: PortHamiltonianSystem, sample_states: Sequence, law: Optional[ControlLaw] = None) -> ValidationReport:
    """표본 상태에서 B의 반대칭 결함, ∇H/FD 불일치, 질량행렬 정치성 보고. law 가 있으면 ‖φ(0)‖ 도 보고"""
    if len(sample_states) == 0:
        raise ContractViolation("validate_system needs at least one sample state")

    skew = conservative = mismatch = scale = 0.0
    semidefinite = True
    for raw in sample_states:
        x = as_state(raw, sys.state_dim)
        B = sys.structure_at(x)
        scale = max(scale, float(np.linalg.norm(B)))
        skew = max(skew, float(np.linalg.norm(0.5 * (B + B.T))))
        if sys.dissipation is not None:
            S = np.asarray(sys.dissipation(x), dtype=float)
            J = B - S
            conservative = max(conservative, float(np.linalg.norm(0.5 * (J + J.T))))
            eig_max = float(np.linalg.eigvalsh(0.5 * (S + S.T)).max())
            if eig_max > AUDIT_CONFIG["skew_tolerance"] * (1.0 + scale):
                semidefinite = False
        else:
            conservative = skew
        grad = sys.gradient_at(x)
        fd = _fd_gradient(sys.energy, x)
        mismatch = max(mismatch, float(np.linalg.norm(fd - grad) / (1.0 + np.linalg.norm(grad))))

    report = ValidationReport(
        skew_defect=skew,
        conservative_skew_defect=conservative,
        gradient_mismatch=mismatch,
        mass_matrix_ok=sys.mass_matrix_ok,
        dissipation_semidefinite=semidefinite,
        structure_scale=scale,
        n_samples=len(sample_states),
        law_origin_value=_law_origin_value(sys, law),
    )
    logger.debug(
        "validate_system name=%s skew=%.3e grad_mismatch=%.3e mass_ok=%s",
        sys.name, skew, mismatch, report.mass_matrix_ok,
    )
    return report
