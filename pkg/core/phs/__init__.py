"""
PHS Lab v1.0 — 포트-해밀토니안 시스템 수치 라이브러리

구성:
  - system       : 시스템 모델, 제어 법칙, 스텝 기록, 점별 평가
  - disgrad      : 이산 그래디언트 (AVF 구적/닫힌형, secant)
  - integrators  : 이산 그래디언트·AVF-PHS·콜로케이션·분할·비교 방법, 암시적 솔버
  - interconnect : 전력 보존 상호연결, Dirac 구조 검사
  - audit        : 에너지 장부, Lyapunov 감소, 수렴 차수, RK 반례, 오라클
"""

from core.phs.audit import (
    BalanceLedger,
    ButcherTableau,
    build_ledger,
    collocation_oracle,
    estimate_order,
    lyapunov_decrease,
    reference_solution,
    rk_counterexample,
    solve_oracle,
)
from core.phs.disgrad import (
    DiscreteGradientScheme,
    avf_gradient,
    gauss_legendre,
    secant_gradient,
    verify_properties,
)
from core.phs.exceptions import (
    ConfigurationError,
    ContractViolation,
    PHSError,
    SolverFailure,
    StepFailure,
)
from core.phs.integrators import (
    CollocationTableau,
    SplittingSpec,
    StepperConfig,
    integrate,
    integrate_method,
    integrate_splitting,
    make_stepper,
    solve_implicit,
    step_avfphs,
    step_collocation,
    step_disgrad,
    step_reference,
    step_splitting,
)
from core.phs.interconnect import (
    InterconnectedSystem,
    check_dirac,
    check_discrete_dirac,
    interconnect,
    integrate_interconnected,
    step_interconnected_disgrad,
)
from core.phs.system import (
    ControlLaw,
    ControlMode,
    PortHamiltonianSystem,
    StepRecord,
    Trajectory,
    energy_rate,
    eval_output,
    eval_vector_field,
    validate_system,
)
