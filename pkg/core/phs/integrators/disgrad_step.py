"""
PHS Lab v1.0 — 이산 그래디언트 스텝 / AVF-PHS 스텝

    (x_{n+1} − x_n)/h = M⁻¹( B̃ ∇̄H(x_n, x_{n+1}) + G̃ ũ_n )
    ỹ_n = G̃ᵀ M⁻¹ ∇̄H,   ũ_n = u(ỹ_n)

B̃, G̃ 는 중점 (x_n + x_{n+1})/2 에서 평가합니다.
ΔH = h ỹᵀũ + h ∇̄HᵀM⁻¹B̃∇̄H 가 반올림 수준으로 성립합니다 (무손실 B에서 둘째 항은 0).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from core.phs.disgrad import DiscreteGradientScheme
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.solver import solve_implicit
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    StepRecord,
    as_state,
    closed_loop_field,
)


def _midpoint_stage(sys, scheme, law, x_n, z, t_mid):
    g = scheme(sys, x_n, z)
    mid = 0.5 * (x_n + z)
    B = sys.structure_at(mid)
    G = sys.input_matrix_at(mid)
    Minv_g = sys.solve_mass(g)
    y = G.T @ Minv_g
    u = law.evaluate(y, g, t_mid, sys.port_dim)
    return g, Minv_g, B, G, y, u


def step_disgrad(
    sys: PortHamiltonianSystem,
    scheme: DiscreteGradientScheme,
    law: ControlLaw,
    x_n,
    cfg: StepperConfig,
    *,
    t_n: float = 0.0,
    index: int = 1,
) -> tuple[np.ndarray, StepRecord]:
    """이산 그래디언트 한 스텝, 1단계 기록 (b_1 = 1)"""
    x_n = as_state(x_n, sys.state_dim)
    h = cfg.step_size
    t_mid = t_n + 0.5 * h

    def residual(z: np.ndarray) -> np.ndarray:
        g, _, B, G, _, u = _midpoint_stage(sys, scheme, law, x_n, z, t_mid)
        return z - x_n - h * sys.solve_mass(B @ g + G @ u)

    guess = x_n + h * closed_loop_field(sys, law)(t_n, x_n)
    result = solve_implicit(residual, guess, cfg)
    x_next = result.solution

    g, Minv_g, B, _, y, u = _midpoint_stage(sys, scheme, law, x_n, x_next, t_mid)
    record = StepRecord(
        index=index,
        time=t_n + h,
        state=x_next,
        energy=sys.energy(x_next),
        stage_outputs=(y,),
        stage_inputs=(u,),
        stage_weights=np.ones(1),
        supply=h * float(y @ u),
        solver_iterations=result.iterations,
        dissipation=h * float(Minv_g @ (B @ g)),
        discrete_gradients=(g,),
    )
    return x_next, record


def step_avfphs(
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_n,
    cfg: StepperConfig,
    *,
    t_n: float = 0.0,
    index: int = 1,
    scheme: Optional[DiscreteGradientScheme] = None,
) -> tuple[np.ndarray, StepRecord]:
    """AVF-PHS: AVF 이산 그래디언트를 쓰는 step_disgrad (2차 방법)"""
    scheme = scheme or DiscreteGradientScheme.avf_for(sys, cfg.quadrature_nodes)
    return step_disgrad(sys, scheme, law, x_n, cfg, t_n=t_n, index=index)
