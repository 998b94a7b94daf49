"""
PHS Lab v1.0 — 비음수 계수 분할 (Splitting)

B = B₁ + B₂ 로 나누고 제어를 두 번째 부분계에 둡니다:
    S1: ẋ = B₁(x)∇H(x)
    S2: ẋ = B₂(x)∇H(x) + G(x)u

한 스텝은 회문(palindromic) 합성
    Φ^{S2}_{a₁τ}∘Φ^{S1}_{b₁τ}∘ … ∘Φ^{S2}_{a_{m+1}τ}∘ … ∘Φ^{S1}_{b₁τ}∘Φ^{S2}_{a₁τ},   τ = 2h
으로 시간 2h 를 진행합니다 (2Σa_i + a_{m+1} = 1, 2Σb_i = 1, 모든 계수 ≥ 0).
각 부분 흐름이 정확하면 S1 구간은 H를 보존하고 감쇠 S2 구간은 H를 줄입니다.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from core.phs.exceptions import ConfigurationError, ContractViolation, SolverFailure, StepFailure
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    StepRecord,
    Trajectory,
    as_state,
    closed_loop_input,
    eval_output,
)

Flow = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class SplittingSpec:
    """부분 흐름 Φ^{S1}, Φ^{S2} 과 계수 a_1..a_{m+1}, b_1..b_m"""

    flow1: Flow
    flow2: Flow
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if len(a) != len(b) + 1 or not b:
            raise ConfigurationError(f"need m b-coefficients and m+1 a-coefficients, got {len(b)} and {len(a)}")
        if min(a + b) < 0.0:
            raise ConfigurationError(f"splitting coefficients must be non-negative, got a={a} b={b}")
        if abs(2.0 * sum(a[:-1]) + a[-1] - 1.0) > 1e-14:
            raise ConfigurationError("a-coefficients violate 2·Σa_i + a_{m+1} = 1")
        if abs(2.0 * sum(b) - 1.0) > 1e-14:
            raise ConfigurationError("b-coefficients violate 2·Σb_i = 1")

    @classmethod
    def strang(cls, flow1: Flow, flow2: Flow) -> "SplittingSpec":
        """S2(h/2)·S1(h)·S2(h)·S1(h)·S2(h/2)"""
        return cls(flow1, flow2, a=(0.25, 0.5), b=(0.5,))

    def legs(self) -> list[tuple[int, float]]:
        """(부분계 번호, 계수) 순서열, 전체 회문"""
        m = len(self.b)
        half = []
        for i in range(m):
            half.append((2, self.a[i]))
            half.append((1, self.b[i]))
        return half + [(2, self.a[m])] + half[::-1]


def splitting_substeps(spec: SplittingSpec, x_n, h: float) -> list[tuple[int, float, np.ndarray]]:
    """각 부분 흐름 적용 후의 (부분계, 지속시간, 상태). 지속시간 0 구간은 생략"""
    if h <= 0.0:
        raise ConfigurationError(f"step size must be positive, got {h}")
    x = np.asarray(x_n, dtype=float)
    out = []
    for which, coeff in spec.legs():
        tau = 2.0 * h * coeff
        if tau == 0.0:
            continue
        flow = spec.flow1 if which == 1 else spec.flow2
        x = np.asarray(flow(x, tau), dtype=float)
        out.append((which, tau, x))
    return out


def step_splitting(spec: SplittingSpec, x_n, h: float) -> np.ndarray:
    """Φ_{2h}(x_n)"""
    legs = splitting_substeps(spec, x_n, h)
    return legs[-1][2] if legs else np.asarray(x_n, dtype=float)


def integrate_splitting(
    spec: SplittingSpec,
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    N: int,
    h: float,
    method_name: str = "splitting",
    tolerance: float = 1e-13,
) -> Trajectory:
    """분할 궤적 (스텝 크기 2h). 단계 = S2 구간, 공급 = S2 구간의 정확한 일(ΔH)"""
    if N < 1:
        raise ContractViolation(f"N must be >= 1, got {N}")
    x = as_state(x_0, sys.state_dim)
    x0 = x
    records = []
    for n in range(N):
        try:
            legs = splitting_substeps(spec, x, h)
        except (FloatingPointError, ArithmeticError) as exc:
            failure = SolverFailure(f"sub-flow failed: {exc}", x, float("nan"), 0)
            raise StepFailure(n + 1, failure, _partial(records, x0, sys, law, h, method_name, tolerance)) from exc
        outputs, inputs, weights = [], [], []
        supply = 0.0
        before = x
        for which, tau, after in legs:
            dH = sys.energy(after) - sys.energy(before)
            if which == 2:
                outputs.append(eval_output(sys, before))
                inputs.append(closed_loop_input(sys, law, before))
                weights.append(tau / (2.0 * h))
                supply += dH
            before = after
        x = as_state(before, sys.state_dim, "splitting state")
        w = np.asarray(weights)
        records.append(
            StepRecord(
                index=n + 1,
                time=(n + 1) * 2.0 * h,
                state=x,
                energy=sys.energy(x),
                stage_outputs=tuple(outputs),
                stage_inputs=tuple(inputs),
                stage_weights=w / w.sum(),
                supply=supply,
                solver_iterations=0,
            )
        )
    return _partial(records, x0, sys, law, h, method_name, tolerance)


def _partial(records: Sequence[StepRecord], x0, sys, law, h, method_name, tolerance) -> Trajectory:
    return Trajectory(
        records=tuple(records),
        step_size=2.0 * h,
        method_name=method_name,
        initial_state=x0,
        initial_energy=sys.energy(x0),
        initial_output=eval_output(sys, x0),
        initial_input=closed_loop_input(sys, law, x0),
        solver_tolerance=tolerance,
    )
