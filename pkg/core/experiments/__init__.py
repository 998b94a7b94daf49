"""
PHS Lab v1.0 — 번들 실험 레지스트리

experiments.yaml 프리셋(+ 사용자 재정의)으로 Experiment 를 조립합니다.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from core.experiments import linear, microphone, pendulum, rigid_body
from core.phs.exceptions import ConfigurationError
from core.phs.system import ControlLaw, PortHamiltonianSystem

EXPERIMENT_NAMES = ("rigid-body", "pendulum", "microphone", "custom")


@dataclass(frozen=True, eq=False)
class Experiment:
    """시스템 + 제어 + 초기 상태 + 기본 스텝 설정"""

    name: str
    system: PortHamiltonianSystem
    law: ControlLaw
    initial_state: np.ndarray
    step_size: float
    steps: int
    solver_kind: str = "fixed-point"
    max_iterations: int = 100
    splitting: Optional[Callable[[], Any]] = None
    diagnostics: Optional[Callable[[np.ndarray], dict]] = None


def _build_rigid_body(p: dict) -> Experiment:
    inertia = p.get("inertia", rigid_body.DEFAULT_INERTIA)
    damping = p.get("damping_gains", rigid_body.DEFAULT_DAMPING)
    omega = p.get("omega0", rigid_body.DEFAULT_OMEGA)
    quat = p.get("quaternion0", rigid_body.DEFAULT_QUATERNION)
    return Experiment(
        name="rigid-body",
        system=rigid_body.rigid_body_system(inertia),
        law=rigid_body.pd_attitude_law(damping, p.get("stiffness_gains", rigid_body.DEFAULT_STIFFNESS)),
        initial_state=rigid_body.initial_state(omega, quat),
        step_size=float(p.get("h", 0.5)),
        steps=int(p.get("steps", 120)),
        solver_kind=p.get("solver", "newton-numeric-jacobian"),
        max_iterations=int(p.get("max_iter", 100)),
        splitting=lambda: rigid_body.splitting_setup(inertia, damping, omega, quat),
        diagnostics=lambda x: {"q_norm": rigid_body.quaternion_norm(x)},
    )


def _build_pendulum(p: dict) -> Experiment:
    return Experiment(
        name="pendulum",
        system=pendulum.pendulum_system(),
        law=pendulum.arctan_damping(float(p.get("gain", pendulum.DEFAULT_GAIN))),
        initial_state=np.asarray(p.get("initial_state", pendulum.DEFAULT_INITIAL_STATE), dtype=float),
        step_size=float(p.get("h", 0.5)),
        steps=int(p.get("steps", 200)),
        solver_kind=p.get("solver", "fixed-point"),
        max_iterations=int(p.get("max_iter", 100)),
    )


def _build_microphone(p: dict) -> Experiment:
    params = {k: float(p.get(k, v)) for k, v in microphone.DEFAULT_PARAMS.items()}
    return Experiment(
        name="microphone",
        system=microphone.microphone_system(**params),
        law=microphone.cube_root_damping(float(p.get("gain", 0.5))),
        initial_state=np.asarray(p.get("initial_state", microphone.DEFAULT_INITIAL_STATE), dtype=float),
        step_size=float(p.get("h", 0.5)),
        steps=int(p.get("steps", 200)),
        solver_kind=p.get("solver", "newton-numeric-jacobian"),
        max_iterations=int(p.get("max_iter", 200)),
    )


def _build_custom(p: dict) -> Experiment:
    """system: "package.module:factory" → factory(params) -> Experiment"""
    target = p.get("system")
    if not target or ":" not in str(target):
        raise ConfigurationError("custom experiment needs system='module:factory'")
    module_name, attr = str(target).split(":", 1)
    try:
        factory = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as exc:
        raise ConfigurationError(f"cannot load custom system {target}: {exc}") from exc
    experiment = factory(p)
    if not isinstance(experiment, Experiment):
        raise ConfigurationError(f"{target} did not return an Experiment")
    return experiment


_BUILDERS = {
    "rigid-body": _build_rigid_body,
    "pendulum": _build_pendulum,
    "microphone": _build_microphone,
    "custom": _build_custom,
}


def damped_oscillator_experiment(p: dict) -> Experiment:
    """custom 실험 예시: 조화 진동자 + 선형 감쇠 u = −k·y

    phs-bench --experiment custom --system core.experiments:damped_oscillator_experiment
    """
    gain = float(p.get("gain", 0.1))
    return Experiment(
        name="custom",
        system=linear.harmonic_oscillator(float(p.get("stiffness", 1.0)), float(p.get("mass", 1.0))),
        law=ControlLaw.output_feedback(lambda y: gain * y),
        initial_state=np.asarray(p.get("initial_state", (1.0, 0.0)), dtype=float),
        step_size=float(p.get("h", 0.5)),
        steps=int(p.get("steps", 100)),
    )


def build_experiment(name: str, params: Optional[dict] = None) -> Experiment:
    """이름 + 매개변수 dict → Experiment"""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigurationError(f"unknown experiment '{name}', expected one of {EXPERIMENT_NAMES}") from None
    return builder(dict(params or {}))
