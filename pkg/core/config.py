"""
PHS Lab - 수치 설정 파일
Port-Hamiltonian Simulation Lab Configuration
"""

from pathlib import Path

# ============================================================
# 경로 설정
# ============================================================
BASE_DIR = Path(__file__).parent
PROJECT_ROOT = BASE_DIR.parent
OUTPUT_DIR = PROJECT_ROOT / "output"
EXPERIMENTS_FILE = PROJECT_ROOT / "config" / "experiments.yaml"

# ============================================================
# 암시적 솔버 설정
# ============================================================
SOLVER_CONFIG = {
    "tolerance": 1e-12,               # ‖r(z)‖∞ ≤ tol·(1+‖z‖∞)
    "max_iterations": 100,            # 고정점 + root 합산 반복 한도
    "stall_limit": 10,                # 잔차가 줄지 않는 연속 반복 수 → scipy root 전환
    "polish_iterations": 3,           # 수렴 후 반올림 수준까지 추가 반복
    "root_methods": ("hybr", "lm"),   # scipy.optimize.root 방법 (앞에서부터 시도)
    "root_xtol": 4.0 * 2.220446049250313e-16,  # 반복값 상대 변화 허용치 (≈ 4 eps)
}

# ============================================================
# 구적법 설정 (Gauss–Legendre on [0, 1])
# ============================================================
QUADRATURE_CONFIG = {
    "avf_nodes": 8,                   # AVF 이산 그래디언트 기본 노드 수 (차수 15까지 정확)
    "collocation_extra_nodes": 8,     # 콜로케이션 단계 그래디언트: s + 8 노드
    "secant_threshold": 1e-14,        # ‖d‖ < thr·(1+‖x‖) 이면 ∇H(x) 사용
}

# ============================================================
# 검증(Audit) 설정
# ============================================================
AUDIT_CONFIG = {
    "skew_tolerance": 1e-12,          # ‖sym(B)‖_F ≤ tol·(1+‖B‖_F)
    "fd_gradient_step": 1e-5,         # 중앙 차분 상대 증분
    "gradient_tolerance": 1e-6,       # FD 그래디언트 상대 불일치 허용치
    "lyapunov_factor": 10.0,          # ΔH > factor·solver_tol 이면 위반
    "oracle_stages": 3,               # 기준 해 Gauss 콜로케이션 단계 수
    "oracle_refinement": 100,         # 기준 해 스텝 = 격자 간격 / refinement
    "oracle_rtol": 1e-12,             # solve_ivp(DOP853) 상대 허용 오차 (oracle=dop853)
    "oracle_atol": 1e-12,
    "dirac_seed": 0,                  # check_dirac 표본 벡터 시드 (결정적)
}

# ============================================================
# CSV 출력 설정
# ============================================================
CSV_CONFIG = {
    "float_format": ".17g",           # 17 유효숫자
    "trajectory_prefix": "trajectory",
    "ledger_prefix": "ledger",
    "comparison_prefix": "comparison",
}
