"""
PHS Lab v1.0 — 제어 진자 (controlled pendulum)

H(q, p) = ½p² + 1 − cos q,   B = J,   G = [0, 1]ᵀ,   u = −0.01·arctan y
평형점 p = 0, q = 2πn 로 수렴 (n 은 수렴 전 완전 회전 수).
"""

import numpy as np

from core.phs.system import ControlLaw, PortHamiltonianSystem

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
G_PENDULUM = np.array([[0.0], [1.0]])

DEFAULT_INITIAL_STATE = (2.8, 1.4)
DEFAULT_GAIN = 0.01


def _hamiltonian(x):
    return 0.5 * x[1] ** 2 + 1.0 - np.cos(x[0])


def _gradient(x):
    return np.array([np.sin(x[0]), x[1]])


def _averaged_gradient(x, xp):
    # ∫₀¹ sin(q + αd) dα = (cos q − cos q′)/d = sin(m)·sin(d/2)/(d/2)
    m = 0.5 * (x[0] + xp[0])
    d = xp[0] - x[0]
    return np.array([np.sin(m) * np.sinc(d / (2.0 * np.pi)), 0.5 * (x[1] + xp[1])])


def pendulum_system() -> PortHamiltonianSystem:
    return PortHamiltonianSystem(
        state_dim=2,
        port_dim=1,
        hamiltonian=_hamiltonian,
        gradient=_gradient,
        structure=lambda x: J2,
        input_matrix=lambda x: G_PENDULUM,
        averaged_gradient=_averaged_gradient,
        name="pendulum",
    )


def arctan_damping(gain: float = DEFAULT_GAIN) -> ControlLaw:
    """u = −gain·arctan(y)"""
    return ControlLaw.output_feedback(lambda y: gain * np.arctan(y))


def rotation_count(q_final: float) -> int:
    """round(q / 2π)"""
    return int(round(float(q_final) / (2.0 * np.pi)))
