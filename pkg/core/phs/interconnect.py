"""
PHS Lab v1.0 — 전력 보존 상호연결 (Interconnection)

두 시스템 (H, B, G), (H_c, B_c, G_c) 를 u = −y_c, u_c = y 로 연결하면

    Ẋ = C(x, γ) ∇H̃,   C = [[B, −G G_cᵀ], [G_c Gᵀ, B_c]],   H̃ = H(x) + H_c(γ)

인 닫힌 포트-해밀토니안 시스템이 됩니다 (외부 포트 없음, port_dim = 0).
이산 스텝은 블록별 이산 그래디언트와 중점 평가 C 를 사용하며 H̃ 를 보존합니다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from core.config import AUDIT_CONFIG
from core.phs.disgrad import DiscreteGradientScheme, SchemeKind
from core.phs.exceptions import ConfigurationError, ContractViolation, SolverFailure, StepFailure
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.solver import solve_implicit
from core.phs.system import (
    PortHamiltonianSystem,
    StepRecord,
    Trajectory,
    as_state,
    validate_system,
)

logger = logging.getLogger("phs.interconnect")


@dataclass(frozen=True, eq=False)
class InterconnectedSystem:
    """sys_a (상태 x) 와 sys_b (상태 γ) 의 합성"""

    sys_a: PortHamiltonianSystem
    sys_b: PortHamiltonianSystem
    composed: PortHamiltonianSystem

    def split(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=float)
        k = self.sys_a.state_dim
        return X[:k], X[k:]

    def join(self, x, gamma) -> np.ndarray:
        return np.concatenate([np.asarray(x, dtype=float), np.asarray(gamma, dtype=float)])

    def component_energies(self, X) -> tuple[float, float]:
        x, gamma = self.split(X)
        return self.sys_a.energy(x), self.sys_b.energy(gamma)

    def port_values(self, x, gamma, effort_a, effort_b) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(y, y_c, u, u_c): 효력(effort)에서 출력 계산 후 u = −y_c, u_c = y"""
        y = self.sys_a.input_matrix_at(x).T @ effort_a
        y_c = self.sys_b.input_matrix_at(gamma).T @ effort_b
        return y, y_c, -y_c, y

    def discrete_gradient(self, scheme: DiscreteGradientScheme, X, Xp) -> np.ndarray:
        """블록별 이산 그래디언트 [∇̄H(x,x′), ∇̄H_c(γ,γ′)]"""
        x, gamma = self.split(X)
        xp, gammap = self.split(Xp)
        return np.concatenate([_scheme_for(scheme, self.sys_a)(self.sys_a, x, xp), _scheme_for(scheme, self.sys_b)(self.sys_b, gamma, gammap)])


def _scheme_for(scheme: DiscreteGradientScheme, sys: PortHamiltonianSystem) -> DiscreteGradientScheme:
    # closed-form 을 요청했지만 해당 성분이 제공하지 않으면 secant
    if scheme.closed_form is None and scheme.kind is SchemeKind.AVF_CLOSED_FORM and sys.averaged_gradient is None:
        return DiscreteGradientScheme.secant()
    return scheme


def _check_states(sys: PortHamiltonianSystem, count: int = 4) -> list[np.ndarray]:
    rng = np.random.default_rng(AUDIT_CONFIG["dirac_seed"])
    return [np.zeros(sys.state_dim)] + [rng.normal(size=sys.state_dim) for _ in range(count)]


def interconnect(sys_a: PortHamiltonianSystem, sys_b: PortHamiltonianSystem) -> InterconnectedSystem:
    """u = −y_c, u_c = y 로 연결된 합성 시스템"""
    if sys_a.port_dim != sys_b.port_dim:
        raise ConfigurationError(f"port dimensions differ: {sys_a.port_dim} vs {sys_b.port_dim}")
    for sys in (sys_a, sys_b):
        if sys.mass_matrix is not None and not np.array_equal(sys.mass_matrix, np.eye(sys.state_dim)):
            raise ConfigurationError(f"interconnection requires identity mass matrices ({sys.name})")
        if not validate_system(sys, _check_states(sys)).is_skew:
            raise ConfigurationError(f"component {sys.name} has a non-skew structure matrix")

    na, nb = sys_a.state_dim, sys_b.state_dim

    def split(X):
        X = np.asarray(X, dtype=float)
        return X[:na], X[na:]

    def hamiltonian(X):
        x, gamma = split(X)
        return sys_a.energy(x) + sys_b.energy(gamma)

    def gradient(X):
        x, gamma = split(X)
        return np.concatenate([sys_a.gradient_at(x), sys_b.gradient_at(gamma)])

    def structure(X):
        x, gamma = split(X)
        G = sys_a.input_matrix_at(x)
        Gc = sys_b.input_matrix_at(gamma)
        return np.block([
            [sys_a.structure_at(x), -G @ Gc.T],
            [Gc @ G.T, sys_b.structure_at(gamma)],
        ])

    def input_matrix(X):
        return np.zeros((na + nb, 0))

    averaged = None
    if sys_a.averaged_gradient is not None and sys_b.averaged_gradient is not None:
        def averaged(X, Xp):
            x, gamma = split(X)
            xp, gammap = split(Xp)
            return np.concatenate([sys_a.averaged_gradient(x, xp), sys_b.averaged_gradient(gamma, gammap)])

    composed = PortHamiltonianSystem(
        state_dim=na + nb,
        port_dim=0,
        hamiltonian=hamiltonian,
        gradient=gradient,
        structure=structure,
        input_matrix=input_matrix,
        averaged_gradient=averaged,
        name=f"{sys_a.name}+{sys_b.name}",
    )
    logger.debug("interconnect a=%s b=%s state_dim=%d ports=%d", sys_a.name, sys_b.name, na + nb, sys_a.port_dim)
    return InterconnectedSystem(sys_a, sys_b, composed)


def swap_permutation(isys: InterconnectedSystem) -> np.ndarray:
    """(x, γ) → (γ, x) 치환 행렬 P"""
    na, nb = isys.sys_a.state_dim, isys.sys_b.state_dim
    P = np.zeros((na + nb, na + nb))
    P[:nb, na:] = np.eye(nb)
    P[nb:, :na] = np.eye(na)
    return P


# ============================================================
# 이산 상호연결 스텝
# ============================================================

class InterconnectedStep(NamedTuple):
    x: np.ndarray
    gamma: np.ndarray
    record: StepRecord


def step_interconnected_disgrad(
    isys: InterconnectedSystem,
    scheme: DiscreteGradientScheme,
    x_n,
    gamma_n,
    cfg: StepperConfig,
    *,
    t_n: float = 0.0,
    index: int = 1,
) -> InterconnectedStep:
    """(X_{n+1}−X_n)/h = C(X_{n+1/2}) ∇̄H̃,  u = −y_c, u_c = y (중점)"""
    sys = isys.composed
    x_n = as_state(x_n, isys.sys_a.state_dim, "x")
    gamma_n = as_state(gamma_n, isys.sys_b.state_dim, "gamma")
    X_n = isys.join(x_n, gamma_n)
    h = cfg.step_size

    def residual(Z):
        e = isys.discrete_gradient(scheme, X_n, Z)
        return Z - X_n - h * (sys.structure_at(0.5 * (X_n + Z)) @ e)

    guess = X_n + h * (sys.structure_at(X_n) @ sys.gradient_at(X_n))
    result = solve_implicit(residual, guess, cfg)
    X = result.solution

    e = isys.discrete_gradient(scheme, X_n, X)
    mid = 0.5 * (X_n + X)
    x_mid, g_mid = isys.split(mid)
    e_a, e_b = isys.split(e)
    y, y_c, u, u_c = isys.port_values(x_mid, g_mid, e_a, e_b)
    stage_y = np.concatenate([y, y_c])
    stage_u = np.concatenate([u, u_c])
    record = StepRecord(
        index=index,
        time=t_n + h,
        state=X,
        energy=sys.energy(X),
        stage_outputs=(stage_y,),
        stage_inputs=(stage_u,),
        stage_weights=np.ones(1),
        supply=h * float(stage_y @ stage_u),
        solver_iterations=result.iterations,
        dissipation=h * float(e @ (sys.structure_at(mid) @ e)),
        discrete_gradients=(e,),
    )
    x_next, gamma_next = isys.split(X)
    return InterconnectedStep(x_next, gamma_next, record)


def integrate_interconnected(
    isys: InterconnectedSystem,
    scheme: DiscreteGradientScheme,
    x_0,
    gamma_0,
    N: int,
    cfg: StepperConfig,
) -> Trajectory:
    """합성 상태 X = (x, γ) 궤적"""
    if N < 1:
        raise ContractViolation(f"N must be >= 1, got {N}")
    sys = isys.composed
    X0 = isys.join(as_state(x_0, isys.sys_a.state_dim, "x"), as_state(gamma_0, isys.sys_b.state_dim, "gamma"))
    x, gamma = isys.split(X0)
    records = []

    def partial():
        return Trajectory(
            records=tuple(records),
            step_size=cfg.step_size,
            method_name=f"interconnected-{scheme.label}",
            initial_state=X0,
            initial_energy=sys.energy(X0),
            initial_output=np.zeros(0),
            initial_input=np.zeros(0),
            solver_tolerance=cfg.solver_tolerance,
        )

    for n in range(N):
        try:
            x, gamma, record = step_interconnected_disgrad(isys, scheme, x, gamma, cfg, t_n=n * cfg.step_size, index=n + 1)
        except SolverFailure as exc:
            raise StepFailure(n + 1, exc, partial()) from exc
        records.append(record)
    return partial()


# ============================================================
# Dirac 구조 검사
# ============================================================

@dataclass
class DiracReport:
    """check_dirac 결과"""

    pairing_defect: float           # max |gᵀCg| / (‖g‖²‖C‖)
    skew_defect: float              # max ‖(C + Cᵀ)/2‖_F
    power_balance_defect: float     # max |yᵀu + y_cᵀu_c|
    graph_rank: int                 # min rank [C; I] (= n)
    state_dim: int
    n_checks: int

    @property
    def graph_is_maximal(self) -> bool:
        return self.graph_rank == self.state_dim


def check_dirac(
    isys: Union[InterconnectedSystem, PortHamiltonianSystem],
    sample_states: Sequence,
    n_pairs: int = 8,
    seed: int = AUDIT_CONFIG["dirac_seed"],
) -> DiracReport:
    """표본 상태마다 그래디언트형 벡터 g 로 흐름 f = Cg 와의 짝 ⟨g, f⟩ 검사"""
    if len(sample_states) == 0:
        raise ContractViolation("check_dirac needs at least one sample state")
    sys = isys.composed if isinstance(isys, InterconnectedSystem) else isys
    n = sys.state_dim
    rng = np.random.default_rng(seed)
    pairing = skew = power = 0.0
    rank = n
    checks = 0
    for raw in sample_states:
        X = as_state(raw, n)
        C = sys.structure_at(X)
        c_norm = float(np.linalg.norm(C))
        skew = max(skew, float(np.linalg.norm(0.5 * (C + C.T))))
        rank = min(rank, int(np.linalg.matrix_rank(np.vstack([C, np.eye(n)]))))
        for _ in range(n_pairs):
            g = rng.normal(size=n)
            defect = abs(float(g @ (C @ g)))
            pairing = max(pairing, defect / (float(g @ g) * c_norm) if c_norm > 0.0 else defect)
            if isinstance(isys, InterconnectedSystem):
                x, gamma = isys.split(X)
                e_a, e_b = isys.split(g)
                y, y_c, u, u_c = isys.port_values(x, gamma, e_a, e_b)
                power = max(power, abs(float(y @ u) + float(y_c @ u_c)))
            checks += 1
    return DiracReport(pairing, skew, power, rank, n, checks)


def check_discrete_dirac(traj: Trajectory) -> float:
    """기록된 쌍 f = (X_{n+1}−X_n)/h, e = ∇̄H̃_n 의 max |⟨e, f⟩|"""
    worst = 0.0
    previous = traj.initial_state
    for rec in traj.records:
        if not rec.discrete_gradients:
            raise ContractViolation(f"record {rec.index} carries no discrete gradient")
        f = (rec.state - previous) / traj.step_size
        worst = max(worst, abs(float(rec.discrete_gradients[0] @ f)))
        previous = rec.state
    return worst
