"""
PHS Lab v1.0 — 암시적 방정식 솔버

r(z) = 0 을 푼다. 기본은 고정점 반복 z ← z − r(z);
잔차가 stall_limit 번 연속으로 줄지 않으면 scipy.optimize.root
(Powell hybrid → Levenberg–Marquardt, 수치 Jacobian)로 전환.

수렴 판정: ‖r(z)‖∞ ≤ tol·(1 + ‖z‖∞)
root 의 success 플래그는 보지 않고 이 판정만 사용합니다.
수렴 후 잔차가 계속 줄어드는 동안 최대 polish_iterations 회 고정점 반복을 더하여
에너지 장부(ledger)가 반올림 수준으로 닫히게 합니다.

반복 횟수: 고정점 1회 = 1, root 는 평가 횟수 / (n + 1) (Jacobian 1회 + 평가 1회 ≈ Newton 1회).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import root

from core.config import SOLVER_CONFIG
from core.phs.exceptions import SolverFailure
from core.phs.integrators.config import SolverKind, StepperConfig

logger = logging.getLogger("phs.solver")

ResidualMap = Callable[[np.ndarray], np.ndarray]

# 비유한 잔차를 root 에 넘길 때의 대체값
_NONFINITE = 1e150


@dataclass
class SolverResult:
    """solve_implicit 결과"""

    solution: np.ndarray
    iterations: int
    residual_norm: float
    kind: SolverKind
    fell_back: bool = False


def _inf(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def _converged(rn: float, z: np.ndarray, tol: float) -> bool:
    return rn <= tol * (1.0 + _inf(z))


class _Tracker:
    """최적 반복값 추적 (실패 시 보고용)"""

    def __init__(self, z: np.ndarray, rn: float):
        self.z, self.rn = z, rn
        self.scaled = rn / (1.0 + _inf(z))

    def offer(self, z: np.ndarray, rn: float):
        scaled = rn / (1.0 + _inf(z))
        if np.isfinite(scaled) and scaled < self.scaled:
            self.z, self.rn, self.scaled = z, rn, scaled


def _fixed_point(residual_map, z, r, rn, cfg, tracker, iterations):
    stalled = 0
    while iterations < cfg.max_iterations:
        if _converged(rn, z, cfg.solver_tolerance):
            return z, r, rn, iterations, True
        z_new = z - r
        r_new = residual_map(z_new)
        iterations += 1
        rn_new = _inf(r_new)
        if not np.isfinite(rn_new):
            stalled = cfg.stall_limit
        elif rn_new >= rn:
            stalled += 1
        else:
            stalled = 0
        if np.isfinite(rn_new):
            z, r, rn = z_new, r_new, rn_new
            tracker.offer(z, rn)
        if stalled >= cfg.stall_limit:
            break
    return z, r, rn, iterations, _converged(rn, z, cfg.solver_tolerance)


def _root_options(method: str, budget: int) -> dict:
    xtol = SOLVER_CONFIG["root_xtol"]
    if method == "lm":
        return {"xtol": xtol, "ftol": xtol, "maxiter": budget}
    return {"xtol": xtol, "maxfev": budget}


def _root(residual_map, z, cfg, tracker, iterations):
    """scipy.optimize.root 를 방법 순서대로 시도. 최적 반복값에서 재시작"""

    def fun(v):
        r = np.asarray(residual_map(v), dtype=float)
        return np.where(np.isfinite(r), r, _NONFINITE)

    n = z.size
    for method in SOLVER_CONFIG["root_methods"]:
        remaining = cfg.max_iterations - iterations
        if remaining <= 0:
            break
        sol = root(fun, tracker.z, method=method, options=_root_options(method, remaining * (n + 1)))
        iterations = min(cfg.max_iterations, iterations + max(1, math.ceil(sol.nfev / (n + 1))))
        z = np.asarray(sol.x, dtype=float).reshape(np.shape(tracker.z))
        r = np.asarray(residual_map(z), dtype=float)
        rn = _inf(r)
        tracker.offer(z, rn)
        logger.debug("root_done method=%s nfev=%d residual=%.3e", method, sol.nfev, rn)
        if _converged(tracker.rn, tracker.z, cfg.solver_tolerance):
            z = tracker.z
            return z, np.asarray(residual_map(z), dtype=float), tracker.rn, iterations, True
    return tracker.z, None, tracker.rn, iterations, False


def _polish(residual_map, z, r, rn, iterations):
    """수렴 후 잔차가 감소하는 동안만 고정점 반복 추가"""
    for _ in range(SOLVER_CONFIG["polish_iterations"]):
        if rn == 0.0:
            break
        z_new = z - r
        r_new = residual_map(z_new)
        rn_new = _inf(r_new)
        if not rn_new < rn:
            break
        z, r, rn = z_new, r_new, rn_new
        iterations += 1
    return z, rn, iterations


def solve_implicit(residual_map: ResidualMap, x_guess, cfg: StepperConfig) -> SolverResult:
    """r(z)=0 의 해와 반복 횟수. 실패 시 SolverFailure(최적 반복값, 잔차)"""
    z = np.array(x_guess, dtype=float)
    r = np.asarray(residual_map(z), dtype=float)
    rn = _inf(r)
    tracker = _Tracker(z, rn)
    iterations = 0
    kind = SolverKind(cfg.solver_kind)
    fell_back = False

    if kind is SolverKind.FIXED_POINT:
        z, r, rn, iterations, done = _fixed_point(residual_map, z, r, rn, cfg, tracker, iterations)
        if done:
            z, rn, iterations = _polish(residual_map, z, r, rn, iterations)
            return SolverResult(z, iterations, rn, kind)
        if iterations >= cfg.max_iterations:
            raise SolverFailure("fixed-point iteration did not converge", tracker.z, tracker.rn, iterations)
        logger.info("solver_fallback kind=root iterations=%d residual=%.3e", iterations, tracker.rn)
        fell_back = True
    elif _converged(rn, z, cfg.solver_tolerance):
        return SolverResult(z, 0, rn, kind)

    z, r, rn, iterations, done = _root(residual_map, z, cfg, tracker, iterations)
    if not done:
        raise SolverFailure("root iteration did not converge", tracker.z, tracker.rn, iterations)
    z, rn, iterations = _polish(residual_map, z, r, rn, iterations)
    return SolverResult(z, iterations, rn, SolverKind.NEWTON, fell_back)
