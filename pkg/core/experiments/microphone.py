"""
PHS Lab v1.0 — 축전기 마이크 (capacitor microphone, 소산 시스템)

x = [q, p, Q]
H(x) = p²/(2m) + ½(q − q̄)² + ½ q Q²
B = [[0, 1, 0], [−1, −c, 0], [0, 0, −1/R]]  (대칭 부분 S = diag(0, −c, −1/R))
G = [0, 1, 1/R]ᵀ,   u = −½·∛y

∛ 는 0 에서 Lipschitz 가 아니므로 기본 솔버는 scipy root (수치 Jacobian) 입니다.
"""

import numpy as np

from core.phs.system import ControlLaw, PortHamiltonianSystem

DEFAULT_PARAMS = {"R": 100.0, "c": 0.1, "m": 4.0, "q_bar": 3.0}
DEFAULT_INITIAL_STATE = (2.0, 1.0, 1.0)


def microphone_system(R: float = 100.0, c: float = 0.1, m: float = 4.0, q_bar: float = 3.0) -> PortHamiltonianSystem:
    B = np.array([[0.0, 1.0, 0.0], [-1.0, -c, 0.0], [0.0, 0.0, -1.0 / R]])
    S = np.diag([0.0, -c, -1.0 / R])
    G = np.array([[0.0], [1.0], [1.0 / R]])

    def hamiltonian(x):
        q, p, Q = x
        return p * p / (2.0 * m) + 0.5 * (q - q_bar) ** 2 + 0.5 * q * Q * Q

    def gradient(x):
        q, p, Q = x
        return np.array([q - q_bar + 0.5 * Q * Q, p / m, q * Q])

    def averaged_gradient(x, xp):
        q0, p0, Q0 = x
        q1, p1, Q1 = xp
        return np.array([
            0.5 * (q0 + q1) - q_bar + (Q0 * Q0 + Q0 * Q1 + Q1 * Q1) / 6.0,
            0.5 * (p0 + p1) / m,
            (2.0 * q0 * Q0 + q0 * Q1 + q1 * Q0 + 2.0 * q1 * Q1) / 6.0,
        ])

    return PortHamiltonianSystem(
        state_dim=3,
        port_dim=1,
        hamiltonian=hamiltonian,
        gradient=gradient,
        structure=lambda x: B,
        input_matrix=lambda x: G,
        dissipation=lambda x: S,
        averaged_gradient=averaged_gradient,
        name="microphone",
    )


def cube_root_damping(gain: float = 0.5) -> ControlLaw:
    """u = −gain·∛y"""
    return ControlLaw.output_feedback(lambda y: gain * np.cbrt(y))
