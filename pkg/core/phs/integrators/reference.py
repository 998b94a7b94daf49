"""
PHS Lab v1.0 — 비교용 고전 방법

폐루프 벡터장 f(t, x) = M⁻¹(B(x)∇H(x) + G(x)u(y(x))) 전체에 적용:
  - implicit-midpoint : x₁ = x₀ + h f(t+h/2, (x₀+x₁)/2)
  - plain-avf         : x₁ = x₀ + h ∫₀¹ f(t+αh, x₀+α(x₁−x₀)) dα  (8점 Gauss)
  - improved-euler    : Heun 2단계 양해법

기록의 단계 출력/입력은 각 방법이 f를 평가하는 점에서의 값입니다.
이 방법들은 이산 에너지 균형을 보장하지 않으므로 장부 잔차가 0이 아닙니다.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from core.phs.disgrad import gauss_legendre
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.solver import solve_implicit
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    StepRecord,
    as_state,
    closed_loop_field,
    closed_loop_input,
    eval_output,
)


class ReferenceMethod(str, Enum):
    IMPLICIT_MIDPOINT = "implicit-midpoint"
    PLAIN_AVF = "plain-avf"
    IMPROVED_EULER = "improved-euler"


def _advance(method: ReferenceMethod, sys, law, x_n, cfg, t_n):
    """(x_{n+1}, [(단계 상태, 단계 시각, 가중치)], 반복 횟수)"""
    f = closed_loop_field(sys, law)
    h = cfg.step_size

    if method is ReferenceMethod.IMPROVED_EULER:
        k1 = f(t_n, x_n)
        x_pred = x_n + h * k1
        k2 = f(t_n + h, x_pred)
        return x_n + 0.5 * h * (k1 + k2), [(x_n, t_n, 0.5), (x_pred, t_n + h, 0.5)], 0

    guess = x_n + h * f(t_n, x_n)
    if method is ReferenceMethod.IMPLICIT_MIDPOINT:
        result = solve_implicit(lambda z: z - x_n - h * f(t_n + 0.5 * h, 0.5 * (x_n + z)), guess, cfg)
        x1 = result.solution
        return x1, [(0.5 * (x_n + x1), t_n + 0.5 * h, 1.0)], result.iterations

    quad = gauss_legendre(cfg.quadrature_nodes)

    def residual(z):
        d = z - x_n
        avg = sum(w * f(t_n + a * h, x_n + a * d) for a, w in zip(quad.nodes, quad.weights))
        return z - x_n - h * avg

    result = solve_implicit(residual, guess, cfg)
    x1 = result.solution
    stages = [(x_n + a * (x1 - x_n), t_n + a * h, w) for a, w in zip(quad.nodes, quad.weights)]
    return x1, stages, result.iterations


def step_reference(method, sys: PortHamiltonianSystem, law: ControlLaw, x_n, cfg: StepperConfig, *, t_n: float = 0.0) -> np.ndarray:
    x_n = as_state(x_n, sys.state_dim)
    x1, _, _ = _advance(ReferenceMethod(method), sys, law, x_n, cfg, t_n)
    return x1


def reference_stepper(method):
    """integrate 용 스텝 함수 (기록 포함)"""
    method = ReferenceMethod(method)

    def stepper(sys, law, x_n, cfg, *, t_n=0.0, index=1):
        x_n = as_state(x_n, sys.state_dim)
        x1, stages, iterations = _advance(method, sys, law, x_n, cfg, t_n)
        h = cfg.step_size
        ys, us, ws, gs = [], [], [], []
        dissipation = 0.0
        for X, t, w in stages:
            g = sys.gradient_at(X)
            ys.append(eval_output(sys, X))
            us.append(closed_loop_input(sys, law, X, t))
            ws.append(w)
            gs.append(g)
            dissipation += h * w * float(sys.solve_mass(g) @ (sys.structure_at(X) @ g))
        record = StepRecord(
            index=index,
            time=t_n + h,
            state=x1,
            energy=sys.energy(x1),
            stage_outputs=tuple(ys),
            stage_inputs=tuple(us),
            stage_weights=np.asarray(ws),
            supply=h * sum(w * float(y @ u) for w, y, u in zip(ws, ys, us)),
            solver_iterations=iterations,
            dissipation=dissipation,
            discrete_gradients=tuple(gs),
        )
        return x1, record

    stepper.__name__ = f"step_{method.name.lower()}"
    return stepper
