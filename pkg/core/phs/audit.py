"""
PHS Lab v1.0 — 검증(Audit): 에너지 장부, Lyapunov 감소, 수렴 차수, RK 반례

에너지 장부 행 n:
    ΔH_n = H_n − H_{n−1}
    supply_n = h Σ b_j y_njᵀ u_nj
    residual_n = ΔH_n − supply_n − dissipation_n
    A_ext = −Σ supply_n  (외부 일 누적)

무손실 구조에서는 dissipation_n 이 반올림 수준이므로 residual_n 이 곧 이산 균형식의 결함입니다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from core.config import AUDIT_CONFIG
from core.phs.disgrad import DiscreteGradientScheme
from core.phs.exceptions import ConfigurationError, ContractViolation, SolverFailure, StepFailure
from core.phs.integrators.collocation import CollocationTableau
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.disgrad_step import step_avfphs
from core.phs.integrators.integrate import integrate, make_stepper
from core.phs.integrators.solver import solve_implicit
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    Trajectory,
    as_state,
    closed_loop_field,
    eval_output,
)

logger = logging.getLogger("phs.audit")


# ============================================================
# 에너지 장부
# ============================================================

@dataclass(frozen=True)
class LedgerRow:
    step: int
    time: float
    energy: float
    delta_energy: float
    supply: float
    residual: float
    a_ext_cumulative: float
    dissipation: float


@dataclass
class BalanceLedger:
    """궤적 기록에서 계산한 이산 에너지 균형"""

    rows: list
    initial_energy: float
    method_name: str

    @property
    def max_residual(self) -> float:
        return max((abs(r.residual) for r in self.rows), default=0.0)

    @property
    def total_energy_change(self) -> float:
        return self.rows[-1].energy - self.initial_energy if self.rows else 0.0

    @property
    def a_ext(self) -> float:
        return self.rows[-1].a_ext_cumulative if self.rows else 0.0

    @property
    def total_dissipation(self) -> float:
        return float(sum(r.dissipation for r in self.rows))

    @property
    def exchange_defect(self) -> float:
        """|ΔH_total + A_ext|"""
        return abs(self.total_energy_change + self.a_ext)

    def within(self, tolerance: float) -> bool:
        """max |residual| ≤ tolerance·(1 + |H_0|)"""
        return self.max_residual <= tolerance * (1.0 + abs(self.initial_energy))


def build_ledger(traj: Trajectory) -> BalanceLedger:
    if not traj.records:
        raise ContractViolation("cannot build a ledger from an empty trajectory")
    rows = []
    previous = traj.initial_energy
    a_ext = 0.0
    for rec in traj.records:
        if not rec.has_stages:
            raise ContractViolation(f"record {rec.index} carries no stage data")
        dH = rec.energy - previous
        a_ext -= rec.supply
        rows.append(
            LedgerRow(
                step=rec.index,
                time=rec.time,
                energy=rec.energy,
                delta_energy=dH,
                supply=rec.supply,
                residual=dH - rec.supply - rec.dissipation,
                a_ext_cumulative=a_ext,
                dissipation=rec.dissipation,
            )
        )
        previous = rec.energy
    return BalanceLedger(rows=rows, initial_energy=traj.initial_energy, method_name=traj.method_name)


# ============================================================
# Lyapunov 감소
# ============================================================

@dataclass
class LyapunovReport:
    violations: int
    max_increase: float
    threshold: float
    steps: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def lyapunov_decrease(traj: Trajectory, law: Optional[ControlLaw] = None, threshold: Optional[float] = None) -> LyapunovReport:
    """ΔH_n > threshold (기본 10 × 솔버 허용치) 인 스텝 수"""
    if law is not None and not law.is_damping:
        raise ConfigurationError(f"lyapunov_decrease expects a damping law, got {law.mode.value}")
    if threshold is None:
        threshold = AUDIT_CONFIG["lyapunov_factor"] * traj.solver_tolerance
    dH = np.diff(traj.energies)
    max_increase = float(max(dH.max(initial=0.0), 0.0))
    return LyapunovReport(
        violations=int(np.count_nonzero(dH > threshold)),
        max_increase=max_increase,
        threshold=threshold,
        steps=len(traj),
    )


# ============================================================
# 오라클 (고정밀 참조 해)
# ============================================================

def solve_oracle(
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    times: Sequence[float],
    *,
    rtol: float = AUDIT_CONFIG["oracle_rtol"],
    atol: float = AUDIT_CONFIG["oracle_atol"],
    max_step: Optional[float] = None,
    method: str = "DOP853",
) -> np.ndarray:
    """폐루프 벡터장을 solve_ivp 로 적분하여 times 에서의 상태 (len(times) × n)"""
    x0 = as_state(x_0, sys.state_dim, "initial state")
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty((0, sys.state_dim))
    if times[-1] == 0.0:
        return np.tile(x0, (times.size, 1))
    sol = solve_ivp(
        closed_loop_field(sys, law),
        (0.0, float(times[-1])),
        x0,
        method=method,
        t_eval=times,
        rtol=rtol,
        atol=atol,
        max_step=max_step if max_step else np.inf,
    )
    if not sol.success:
        raise SolverFailure(f"oracle integration failed: {sol.message}", x0, float("nan"), int(sol.nfev))
    logger.debug("oracle_done method=%s nfev=%d t_end=%g", method, sol.nfev, times[-1])
    return sol.y.T


def collocation_oracle(
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    times: Sequence[float],
    h_ref: float,
    stages: int = AUDIT_CONFIG["oracle_stages"],
) -> np.ndarray:
    """Gauss 콜로케이션(기본 s=3) 을 h_ref 로 적분한 참조 해. times 는 h_ref 의 배수여야 함"""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty((0, sys.state_dim))
    steps = np.rint(times / h_ref).astype(int)
    if np.any(np.abs(steps * h_ref - times) > 1e-9 * np.maximum(1.0, times)):
        raise ContractViolation(f"oracle times must be multiples of h_ref={h_ref}")
    N = int(steps.max())
    if N == 0:
        return np.tile(as_state(x_0, sys.state_dim), (times.size, 1))
    traj = integrate(make_stepper("collocation", stages=stages), sys, law, x_0, N, StepperConfig(step_size=h_ref), method_name="oracle")
    logger.debug("oracle_done method=collocation-%d h_ref=%g steps=%d", stages, h_ref, N)
    return traj.states[steps]


def reference_solution(
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    times: Sequence[float],
    *,
    kind: str = "collocation",
    h_ref: Optional[float] = None,
    rtol: float = AUDIT_CONFIG["oracle_rtol"],
    atol: float = AUDIT_CONFIG["oracle_atol"],
) -> np.ndarray:
    """
    비교용 기준 해

    kind="collocation" : Gauss s=3, 스텝 h_ref (기본: 격자 간격 / oracle_refinement)
    kind="dop853"      : solve_ivp, h_ref 는 최대 스텝
    """
    if kind == "dop853":
        return solve_oracle(sys, law, x_0, times, rtol=rtol, atol=atol, max_step=h_ref)
    if kind != "collocation":
        raise ConfigurationError(f"unknown oracle '{kind}', expected 'collocation' or 'dop853'")
    times = np.asarray(times, dtype=float)
    if h_ref is None:
        spacing = np.diff(np.concatenate(([0.0], times)))
        spacing = spacing[spacing > 0.0]
        if spacing.size == 0:
            return np.tile(as_state(x_0, sys.state_dim), (times.size, 1))
        h_ref = float(spacing.min()) / AUDIT_CONFIG["oracle_refinement"]
    return collocation_oracle(sys, law, x_0, times, h_ref)


# ============================================================
# 수렴 차수
# ============================================================

@dataclass
class OrderEstimate:
    slope: float
    intercept: float
    step_sizes: list
    errors: list
    failed_step_size: Optional[float] = None

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))


def estimate_order(
    stepper: Callable,
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    T: float,
    h_list: Sequence[float],
    cfg: Optional[StepperConfig] = None,
    reference: Optional[np.ndarray] = None,
) -> OrderEstimate:
    """log‖x_N(h) − x(T)‖ 대 log h 최소제곱 기울기"""
    hs = sorted((float(h) for h in h_list), reverse=True)
    if len(hs) < 3:
        raise ContractViolation("estimate_order needs at least three step sizes")
    ratios = np.array(hs[:-1]) / np.array(hs[1:])
    if np.ptp(ratios) > 1e-9 * ratios.max():
        raise ContractViolation(f"step sizes must form a geometric sequence, got {hs}")
    if reference is None:
        reference = collocation_oracle(sys, law, x_0, [T], hs[-1] / AUDIT_CONFIG["oracle_refinement"])[-1]
    cfg = cfg or StepperConfig(step_size=hs[0])

    errors, used = [], []
    failed = None
    for h in hs:
        N = int(round(T / h))
        if abs(N * h - T) > 1e-9 * T:
            raise ContractViolation(f"T={T} is not a multiple of h={h}")
        try:
            traj = integrate(stepper, sys, law, x_0, N, cfg.with_step(h))
        except StepFailure as exc:
            logger.warning("order_abort h=%g step=%d", h, exc.step_index)
            failed = h
            break
        errors.append(float(np.linalg.norm(traj.final_state - reference)))
        used.append(h)

    if len(errors) >= 2:
        slope, intercept = np.polyfit(np.log(used), np.log(errors), 1)
    else:
        slope = intercept = float("nan")
    return OrderEstimate(float(slope), float(intercept), used, errors, failed)


# ============================================================
# Runge–Kutta 반례
# ============================================================

@dataclass(frozen=True, eq=False)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    name: str = "rk"
    c: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        if A.shape != (b.size, b.size):
            raise ConfigurationError(f"Butcher matrix shape {A.shape} does not match {b.size} weights")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", A.sum(axis=1))

    @property
    def explicit(self) -> bool:
        return bool(np.allclose(np.triu(self.A), 0.0))

    @classmethod
    def improved_euler(cls) -> "ButcherTableau":
        return cls(A=[[0.0, 0.0], [1.0, 0.0]], b=[0.5, 0.5], name="improved-euler")

    @classmethod
    def implicit_midpoint(cls) -> "ButcherTableau":
        return cls(A=[[0.5]], b=[1.0], name="implicit-midpoint")

    def step(self, f: Callable[[float, np.ndarray], np.ndarray], x0: np.ndarray, h: float, t0: float = 0.0, cfg: Optional[StepperConfig] = None):
        """(x_1, 단계 상태 Y_i)"""
        s, n = self.b.size, x0.size
        if self.explicit:
            K = np.zeros((s, n))
            Y = np.zeros((s, n))
            for i in range(s):
                Y[i] = x0 + h * (self.A[i, :i] @ K[:i])
                K[i] = f(t0 + self.c[i] * h, Y[i])
        else:
            def residual(flat):
                Kt = flat.reshape(s, n)
                Yt = x0 + h * (self.A @ Kt)
                return (Kt - np.array([f(t0 + ci * h, yi) for ci, yi in zip(self.c, Yt)])).ravel()

            K = solve_implicit(residual, np.tile(f(t0, x0), s), cfg or StepperConfig(step_size=h)).solution.reshape(s, n)
            Y = x0 + h * (self.A @ K)
        return x0 + h * (self.b @ K), Y


@dataclass
class CounterexampleReport:
    method: str
    balance_residual: float
    quadrature_defect: float
    energy_change: float
    supply: float


def counterexample_system(F: Callable[[float], float], dF: Callable[[float], float]) -> PortHamiltonianSystem:
    """H = p − F(q), Darboux J, G = I₂  →  q̇ = 1, ṗ = f(q) + ū"""
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return PortHamiltonianSystem(
        state_dim=2,
        port_dim=2,
        hamiltonian=lambda x: float(x[1] - F(x[0])),
        gradient=lambda x: np.array([-dF(x[0]), 1.0]),
        structure=lambda x: J,
        input_matrix=lambda x: np.eye(2),
        name="rk-counterexample",
    )


def rk_counterexample(
    F: Callable[[float], float],
    dF: Callable[[float], float],
    u_bar: float,
    h: float,
    method: Union[str, ButcherTableau] = "improved-euler",
    q0: float = 0.0,
    p0: float = 0.0,
) -> CounterexampleReport:
    """한 스텝 후 |ΔH − h Σ b_i y_iᵀu_i| 와 |ΔF − h Σ b_i f(q_0 + c_i h)|"""
    sys = counterexample_system(F, dF)
    u = np.array([0.0, float(u_bar)])
    law = ControlLaw.open_loop(lambda t: u)
    x0 = np.array([q0, p0], dtype=float)
    H0 = sys.energy(x0)

    if isinstance(method, str) and method == "avfphs":
        cfg = StepperConfig(step_size=h)
        x1, record = step_avfphs(sys, law, x0, cfg, scheme=DiscreteGradientScheme.avf())
        dH = sys.energy(x1) - H0
        exact = F(x1[0]) - F(q0)
        # AVF 는 q 방향 적분을 정확히 재현: ∇̄H_q·Δq = −ΔF
        quad = abs(exact + float(record.discrete_gradients[0][0]) * (x1[0] - q0))
        return CounterexampleReport("avfphs", abs(dH - record.supply - record.dissipation), quad, dH, record.supply)

    tableau = ButcherTableau.improved_euler() if method == "improved-euler" else method
    if not isinstance(tableau, ButcherTableau):
        raise ConfigurationError(f"unknown counterexample method {method!r}")
    x1, Y = tableau.step(closed_loop_field(sys, law), x0, h)
    dH = sys.energy(x1) - H0
    supply = h * sum(bi * float(eval_output(sys, yi) @ u) for bi, yi in zip(tableau.b, Y))
    quad = abs((F(q0 + h) - F(q0)) - h * sum(bi * dF(q0 + ci * h) for bi, ci in zip(tableau.b, tableau.c)))
    return CounterexampleReport(tableau.name, abs(dH - supply), quad, dH, supply)


def gauss_tableau(stages: int) -> ButcherTableau:
    """Gauss 콜로케이션 RK 계수"""
    tab = CollocationTableau.gauss(stages)
    return ButcherTableau(A=tab.stage_matrix, b=tab.weights, name=f"gauss-{stages}")
