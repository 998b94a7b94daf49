"""
PHS Lab v1.0 — 평균 그래디언트 콜로케이션

s단계 콜로케이션. 미지수는 단계 도함수 F_j = σ̇(t_n + c_j h):

    X_τ   = x_n + h Σ_i L_i(τ) F_i,      L_i(τ) = ∫₀^τ ℓ_i
    ∇̄H_j  = ∫₀¹ ℓ_j(α)/b_j ∇H(X_α) dα   (s + 8 점 Gauss)
    F_j   = M⁻¹( B(X_j)∇̄H_j + G(X_j)u_j ),  y_j = G(X_j)ᵀM⁻¹∇̄H_j
    x_{n+1} = x_n + h Σ_j b_j F_j

양의 가중치 b_j 에서 ΔH = h Σ b_j y_jᵀu_j (+ 소산 항) 이 구적 오차 수준으로 성립.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from core.config import QUADRATURE_CONFIG
from core.phs.disgrad import QuadratureRule, gauss_legendre
from core.phs.exceptions import ConfigurationError
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.solver import solve_implicit
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    StepRecord,
    as_state,
    closed_loop_field,
)


def _lagrange_basis(nodes: np.ndarray) -> list[Polynomial]:
    if nodes.size == 1:
        # 단일 노드: ℓ₁ ≡ 1
        return [Polynomial([1.0])]
    basis = []
    for j, cj in enumerate(nodes):
        others = np.delete(nodes, j)
        basis.append(Polynomial.fromroots(others) / np.prod(cj - others))
    return basis


@dataclass(frozen=True, eq=False)
class CollocationTableau:
    """노드 c_j, 가중치 b_j, 단계 그래디언트용 구적 행렬"""

    nodes: np.ndarray
    weights: np.ndarray
    stage_matrix: np.ndarray        # [j, i] = L_i(c_j)
    quadrature: QuadratureRule
    chord_matrix: np.ndarray        # [k, i] = L_i(α_k)
    gradient_weights: np.ndarray    # [j, k] = w_k ℓ_j(α_k) / b_j

    @property
    def stages(self) -> int:
        return int(self.nodes.size)

    @classmethod
    def from_nodes(cls, nodes: Sequence[float], extra_nodes: int = QUADRATURE_CONFIG["collocation_extra_nodes"]) -> "CollocationTableau":
        c = np.asarray(nodes, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ConfigurationError("collocation needs at least one node")
        if np.any(c <= 0.0) or np.any(c >= 1.0):
            raise ConfigurationError(f"collocation nodes must lie in (0, 1), got {c}")
        if c.size > 1 and np.min(np.diff(np.sort(c))) < 1e-12:
            raise ConfigurationError("collocation nodes must be distinct")

        basis = _lagrange_basis(c)
        integrals = [ell.integ() for ell in basis]
        b = np.array([L(1.0) for L in integrals])
        if np.any(b <= 0.0):
            raise ConfigurationError(f"collocation weights must be positive, got {b}")

        quad = gauss_legendre(c.size + extra_nodes)
        A = np.array([[L(cj) for L in integrals] for cj in c])
        Lq = np.array([[L(a) for L in integrals] for a in quad.nodes])
        Wl = np.array([[w * ell(a) / bj for a, w in zip(quad.nodes, quad.weights)] for ell, bj in zip(basis, b)])
        return cls(c, b, A, quad, Lq, Wl)

    @classmethod
    def gauss(cls, stages: int) -> "CollocationTableau":
        """Gauss–Legendre 노드 (차수 2s)"""
        if stages < 1:
            raise ConfigurationError(f"stages must be >= 1, got {stages}")
        return cls.from_nodes(gauss_legendre(stages).nodes)


def _stage_data(sys, tableau, law, x_n, F, h, t_n):
    Xq = x_n + h * (tableau.chord_matrix @ F)
    grads = np.array([sys.gradient_at(X) for X in Xq])
    gbar = tableau.gradient_weights @ grads
    Xs = x_n + h * (tableau.stage_matrix @ F)
    stages = []
    for j in range(tableau.stages):
        B = sys.structure_at(Xs[j])
        G = sys.input_matrix_at(Xs[j])
        Minv_g = sys.solve_mass(gbar[j])
        y = G.T @ Minv_g
        u = law.evaluate(y, gbar[j], t_n + tableau.nodes[j] * h, sys.port_dim)
        stages.append((gbar[j], Minv_g, B, G, y, u))
    return stages


def step_collocation(
    sys: PortHamiltonianSystem,
    tableau: CollocationTableau,
    law: ControlLaw,
    x_n,
    cfg: StepperConfig,
    *,
    t_n: float = 0.0,
    index: int = 1,
) -> tuple[np.ndarray, StepRecord]:
    x_n = as_state(x_n, sys.state_dim)
    h = cfg.step_size
    s, n = tableau.stages, sys.state_dim

    def residual(flat: np.ndarray) -> np.ndarray:
        F = flat.reshape(s, n)
        stages = _stage_data(sys, tableau, law, x_n, F, h, t_n)
        F_new = np.array([sys.solve_mass(B @ g + G @ u) for g, _, B, G, _, u in stages])
        return (F - F_new).ravel()

    f0 = closed_loop_field(sys, law)(t_n, x_n)
    result = solve_implicit(residual, np.tile(f0, s), cfg)
    F = result.solution.reshape(s, n)
    x_next = x_n + h * (tableau.weights @ F)

    stages = _stage_data(sys, tableau, law, x_n, F, h, t_n)
    b = tableau.weights
    supply = h * sum(bj * float(y @ u) for bj, (_, _, _, _, y, u) in zip(b, stages))
    dissipation = h * sum(bj * float(Mg @ (B @ g)) for bj, (g, Mg, B, _, _, _) in zip(b, stages))
    record = StepRecord(
        index=index,
        time=t_n + h,
        state=x_next,
        energy=sys.energy(x_next),
        stage_outputs=tuple(st[4] for st in stages),
        stage_inputs=tuple(st[5] for st in stages),
        stage_weights=b,
        supply=supply,
        solver_iterations=result.iterations,
        dissipation=dissipation,
        discrete_gradients=tuple(st[0] for st in stages),
    )
    return x_next, record
