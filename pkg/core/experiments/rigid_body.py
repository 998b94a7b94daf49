"""
PHS Lab v1.0 — 제어 강체 (controlled rigid body)

상태 x = (ω, q), q = (q₀, q_v) 단위 쿼터니언
    H = ½ ωᵀ𝕀ω + ½ qᵀq
    𝕀ω̇ = −ω̂ ∇_ωH + u,   q̇ = blockdiag(0, ω̂) ∇_qH
    u = −K_d ∇_ωH − K_p ∇_qH    (이산 시 ∇̄H 블록에서 평가)

M = blockdiag(𝕀, I₄), G = [I₃; 0] 이므로 출력 y = GᵀM⁻¹∇H = ω.
쿼터니언은 재정규화하지 않으며 ‖q‖ 드리프트는 진단 열로만 보고합니다.

분할(splitting)은 각운동량 좌표 (m = 𝕀ω, q) 에서 수행:
    S1: 자유 회전 = 축별 평면 회전 R₁(t/2)R₂(t/2)R₃(t)R₂(t/2)R₁(t/2) (각각 정확, H 보존)
    S2: 감쇠 u = −K_d y,  m_i(t) = m_i e^{−K_d,i t / I_i}
"""

from dataclasses import dataclass

import numpy as np

from core.phs.integrators.splitting import SplittingSpec
from core.phs.system import ControlLaw, PortHamiltonianSystem

DEFAULT_INERTIA = (1.0, 2.0, 3.0)
DEFAULT_DAMPING = (3.0, 4.0, 5.0)
DEFAULT_STIFFNESS = ((3.0, 0.0, 0.0, 1.0), (0.0, 5.0, 0.0, 1.0), (0.0, 0.0, 6.0, 1.0))
DEFAULT_OMEGA = (1.0, -0.5, 0.8)
DEFAULT_QUATERNION = (0.5, 0.5, 0.5, 0.5)

G_RIGID = np.vstack([np.eye(3), np.zeros((4, 3))])


def hat(w) -> np.ndarray:
    """ŵ v = w × v"""
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def _attitude_block(w) -> np.ndarray:
    A = np.zeros((4, 4))
    A[1:, 1:] = hat(w)
    return A


def rigid_body_system(inertia=DEFAULT_INERTIA) -> PortHamiltonianSystem:
    I = np.asarray(inertia, dtype=float)

    def hamiltonian(x):
        w, q = x[:3], x[3:]
        return 0.5 * float(w @ (I * w)) + 0.5 * float(q @ q)

    def gradient(x):
        return np.concatenate([I * x[:3], x[3:]])

    def structure(x):
        B = np.zeros((7, 7))
        B[:3, :3] = -hat(x[:3])
        B[3:, 3:] = _attitude_block(x[:3])
        return B

    def averaged_gradient(x, xp):
        # H 가 이차식이므로 AVF = 중점 그래디언트
        return gradient(0.5 * (x + xp))

    M = np.eye(7)
    M[:3, :3] = np.diag(I)
    return PortHamiltonianSystem(
        state_dim=7,
        port_dim=3,
        hamiltonian=hamiltonian,
        gradient=gradient,
        structure=structure,
        input_matrix=lambda x: G_RIGID,
        mass_matrix=M,
        averaged_gradient=averaged_gradient,
        name="rigid-body",
    )


def pd_attitude_law(damping=DEFAULT_DAMPING, stiffness=DEFAULT_STIFFNESS) -> ControlLaw:
    """u = −K_d e_ω − K_p e_q (e = 코에너지)"""
    Kd = np.diag(np.asarray(damping, dtype=float))
    Kp = np.asarray(stiffness, dtype=float).reshape(3, 4)
    return ControlLaw.state_feedback(lambda e: -Kd @ e[:3] - Kp @ e[3:])


def initial_state(omega=DEFAULT_OMEGA, quaternion=DEFAULT_QUATERNION) -> np.ndarray:
    return np.concatenate([np.asarray(omega, dtype=float), np.asarray(quaternion, dtype=float)])


def quaternion_norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x)[3:7]))


# ============================================================
# 각운동량 좌표 분할
# ============================================================

def momentum_system(inertia=DEFAULT_INERTIA) -> PortHamiltonianSystem:
    """(m, q) 좌표: H = ½mᵀ𝕀⁻¹m + ½qᵀq, B = blockdiag(m̂, [[0,0],[0,ω̂]])"""
    I = np.asarray(inertia, dtype=float)

    def hamiltonian(x):
        m, q = x[:3], x[3:]
        return 0.5 * float(m @ (m / I)) + 0.5 * float(q @ q)

    def gradient(x):
        return np.concatenate([x[:3] / I, x[3:]])

    def structure(x):
        B = np.zeros((7, 7))
        B[:3, :3] = hat(x[:3])
        B[3:, 3:] = _attitude_block(x[:3] / I)
        return B

    return PortHamiltonianSystem(
        state_dim=7,
        port_dim=3,
        hamiltonian=hamiltonian,
        gradient=gradient,
        structure=structure,
        input_matrix=lambda x: G_RIGID,
        averaged_gradient=lambda x, xp: gradient(0.5 * (x + xp)),
        name="rigid-body-momentum",
    )


_CYCLIC = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def axis_rotation(x, k: int, t: float, inertia) -> np.ndarray:
    """축 k 부분계의 정확한 흐름: m_k, ω_k 고정, (m_j, m_l) 타원 회전, q_v 는 e_k 축 회전"""
    I = np.asarray(inertia, dtype=float)
    x = np.array(x, dtype=float)
    j, l = _CYCLIC[k]
    mk = x[k]
    w = mk / np.sqrt(I[j] * I[l])
    a, b = x[j] / np.sqrt(I[j]), x[l] / np.sqrt(I[l])
    cw, sw = np.cos(w * t), np.sin(w * t)
    x[j] = (a * cw - b * sw) * np.sqrt(I[j])
    x[l] = (a * sw + b * cw) * np.sqrt(I[l])

    theta = mk / I[k] * t
    qj, ql = x[4 + j], x[4 + l]
    ct, st = np.cos(theta), np.sin(theta)
    x[4 + j] = qj * ct - ql * st
    x[4 + l] = qj * st + ql * ct
    return x


def free_spin_flow(inertia=DEFAULT_INERTIA):
    """S1 흐름: 축별 정확 흐름의 대칭 합성"""

    def flow(x, t):
        x = axis_rotation(x, 0, 0.5 * t, inertia)
        x = axis_rotation(x, 1, 0.5 * t, inertia)
        x = axis_rotation(x, 2, t, inertia)
        x = axis_rotation(x, 1, 0.5 * t, inertia)
        return axis_rotation(x, 0, 0.5 * t, inertia)

    return flow


def damping_flow(damping=DEFAULT_DAMPING, inertia=DEFAULT_INERTIA):
    """S2 흐름: ṁ = −K_d 𝕀⁻¹ m 의 정확한 해"""
    rate = np.asarray(damping, dtype=float) / np.asarray(inertia, dtype=float)

    def flow(x, t):
        x = np.array(x, dtype=float)
        x[:3] = x[:3] * np.exp(-rate * t)
        return x

    return flow


@dataclass(frozen=True, eq=False)
class SplittingSetup:
    spec: SplittingSpec
    system: PortHamiltonianSystem
    law: ControlLaw
    initial_state: np.ndarray


def splitting_setup(inertia=DEFAULT_INERTIA, damping=DEFAULT_DAMPING, omega=DEFAULT_OMEGA, quaternion=DEFAULT_QUATERNION) -> SplittingSetup:
    """Strang 형 비음수 분할 (S2 = 감쇠 주입 u = −K_d y)"""
    I = np.asarray(inertia, dtype=float)
    Kd = np.asarray(damping, dtype=float)
    spec = SplittingSpec.strang(free_spin_flow(I), damping_flow(Kd, I))
    law = ControlLaw.output_feedback(lambda y: Kd * y)
    x0 = np.concatenate([I * np.asarray(omega, dtype=float), np.asarray(quaternion, dtype=float)])
    return SplittingSetup(spec, momentum_system(I), law, x0)
