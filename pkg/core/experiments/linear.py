"""
PHS Lab v1.0 — 선형 시스템 (조화 진동자, 선형 제어기, 무작위 선형 PHS)

H = ½xᵀQx, B·G 상수. 상호연결과 중점법 동치 검사에 사용합니다.
"""

import numpy as np

from core.phs.system import PortHamiltonianSystem


def quadratic_system(Q, B, G, name: str = "linear") -> PortHamiltonianSystem:
    Q = np.asarray(Q, dtype=float)
    B = np.asarray(B, dtype=float)
    G = np.asarray(G, dtype=float).reshape(Q.shape[0], -1)
    return PortHamiltonianSystem(
        state_dim=Q.shape[0],
        port_dim=G.shape[1],
        hamiltonian=lambda x: 0.5 * float(x @ Q @ x),
        gradient=lambda x: Q @ x,
        structure=lambda x: B,
        input_matrix=lambda x: G,
        averaged_gradient=lambda x, xp: Q @ (0.5 * (x + xp)),
        name=name,
    )


def harmonic_oscillator(stiffness: float = 1.0, mass: float = 1.0, coupled: bool = True) -> PortHamiltonianSystem:
    """H = ½kq² + p²/(2m), G = [0, 1]ᵀ (coupled=False 이면 G = 0)"""
    G = [[0.0], [1.0]] if coupled else [[0.0], [0.0]]
    return quadratic_system(
        np.diag([stiffness, 1.0 / mass]),
        [[0.0, 1.0], [-1.0, 0.0]],
        G,
        name="oscillator",
    )


def linear_controller(stiffness: float = 2.0) -> PortHamiltonianSystem:
    """H_c = ½k_cγ², B_c = 0, G_c = 1 (가상 스프링 제어기)"""
    return quadratic_system([[stiffness]], [[0.0]], [[1.0]], name="spring-controller")


def random_linear_system(n: int = 4, m: int = 2, seed: int = 0) -> PortHamiltonianSystem:
    """무작위 반대칭 B, SPD Q, 무작위 G"""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    L = rng.normal(size=(n, n))
    return quadratic_system(L @ L.T + n * np.eye(n), A - A.T, rng.normal(size=(n, m)), name=f"random-linear-{n}")
