"""
PHS Lab v1.0 — 궤적 적분 + 방법 레지스트리

모든 스텝 함수는 동일한 시그니처를 가집니다:
    stepper(sys, law, x_n, cfg, *, t_n, index) -> (x_{n+1}, StepRecord)
"""

from __future__ import annotations

import functools
import logging
from typing import Callable, Optional

from core.phs.disgrad import DiscreteGradientScheme
from core.phs.exceptions import ConfigurationError, ContractViolation, SolverFailure, StepFailure
from core.phs.integrators.collocation import CollocationTableau, step_collocation
from core.phs.integrators.config import StepperConfig
from core.phs.integrators.disgrad_step import step_avfphs, step_disgrad
from core.phs.integrators.reference import ReferenceMethod, reference_stepper
from core.phs.system import (
    ControlLaw,
    PortHamiltonianSystem,
    Trajectory,
    as_state,
    closed_loop_input,
    eval_output,
)

logger = logging.getLogger("phs.integrators")

Stepper = Callable[..., tuple]

STEPPED_METHODS = ("avfphs", "disgrad-secant", "collocation") + tuple(m.value for m in ReferenceMethod)


def make_stepper(method: str, *, stages: int = 2, scheme: Optional[DiscreteGradientScheme] = None) -> Stepper:
    """방법 이름 → 스텝 함수"""
    if method == "avfphs":
        return functools.partial(step_avfphs, scheme=scheme)
    if method == "disgrad-secant":
        def step_secant(sys, law, x_n, cfg, *, t_n=0.0, index=1):
            return step_disgrad(sys, DiscreteGradientScheme.secant(), law, x_n, cfg, t_n=t_n, index=index)
        return step_secant
    if method == "collocation":
        tableau = CollocationTableau.gauss(stages)

        def step_gauss(sys, law, x_n, cfg, *, t_n=0.0, index=1):
            return step_collocation(sys, tableau, law, x_n, cfg, t_n=t_n, index=index)
        return step_gauss
    try:
        return reference_stepper(ReferenceMethod(method))
    except ValueError:
        raise ConfigurationError(f"unknown method '{method}', expected one of {STEPPED_METHODS}") from None


def _trajectory(records, sys, law, x0, cfg, method_name) -> Trajectory:
    return Trajectory(
        records=tuple(records),
        step_size=cfg.step_size,
        method_name=method_name,
        initial_state=x0,
        initial_energy=sys.energy(x0),
        initial_output=eval_output(sys, x0),
        initial_input=closed_loop_input(sys, law, x0, 0.0),
        solver_tolerance=cfg.solver_tolerance,
    )


def integrate(
    stepper: Stepper,
    sys: PortHamiltonianSystem,
    law: ControlLaw,
    x_0,
    N: int,
    cfg: StepperConfig,
    method_name: Optional[str] = None,
) -> Trajectory:
    """N 스텝 순차 적분. 스텝 실패 시 부분 궤적을 담은 StepFailure"""
    if N < 1:
        raise ContractViolation(f"N must be >= 1, got {N}")
    name = method_name or getattr(stepper, "__name__", None) or getattr(getattr(stepper, "func", None), "__name__", "custom")
    x0 = as_state(x_0, sys.state_dim, "initial state")
    h = cfg.step_size
    x = x0
    records = []
    for n in range(N):
        try:
            x, record = stepper(sys, law, x, cfg, t_n=n * h, index=n + 1)
        except SolverFailure as exc:
            partial = _trajectory(records, sys, law, x0, cfg, name)
            logger.error(
                "step_failure method=%s step=%d residual=%.3e iterations=%d",
                name, n + 1, exc.residual_norm, exc.iterations,
            )
            raise StepFailure(n + 1, exc, partial) from exc
        records.append(record)

    traj = _trajectory(records, sys, law, x0, cfg, name)
    logger.debug(
        "integrate_done method=%s steps=%d h=%g iterations=%d final_H=%.17g",
        name, N, h, traj.total_iterations, traj.records[-1].energy,
    )
    return traj


def integrate_method(method: str, sys: PortHamiltonianSystem, law: ControlLaw, x_0, N: int, cfg: StepperConfig, *, stages: int = 2) -> Trajectory:
    """이름으로 적분 (collocation 은 Gauss s 단계)"""
    label = f"collocation-{stages}" if method == "collocation" else method
    return integrate(make_stepper(method, stages=stages), sys, law, x_0, N, cfg, method_name=label)
