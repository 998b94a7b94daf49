"""
PHS Lab v1.0 — 이산 그래디언트 (Discrete Gradients)

∇̄H(x, x′)는 두 성질을 만족하는 ∇H의 근사입니다:
  1. 연쇄 법칙:  ∇̄H(x,x′)ᵀ(x′−x) = H(x′) − H(x)
  2. 일관성:    ∇̄H(x,x) = ∇H(x)

구현 방식:
  - avf-quadrature : ∫₀¹∇H(x+α(x′−x))dα 를 [0,1] Gauss–Legendre 로 계산
  - avf-closed-form: 사용자가 적분해 둔 AVF 그래디언트
  - midpoint-secant: ∇H(m) + [(ΔH − ∇H(m)ᵀd)/‖d‖²]·d (성질 1이 구성상 정확)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from core.config import QUADRATURE_CONFIG
from core.phs.exceptions import ConfigurationError, ContractViolation
from core.phs.system import PortHamiltonianSystem, as_state

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """[0,1] 구적 규칙 (노드, 양의 가중치, 정확 차수)"""

    nodes: np.ndarray
    weights: np.ndarray
    exactness: int

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ConfigurationError("quadrature nodes and weights must be matching 1-D arrays")
        if np.any(self.weights <= 0.0):
            raise ConfigurationError("quadrature weights must be positive")
        if np.any(self.nodes < 0.0) or np.any(self.nodes > 1.0):
            raise ConfigurationError("quadrature nodes must lie in [0, 1]")

    @property
    def size(self) -> int:
        return int(self.nodes.size)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """n점 Gauss–Legendre 규칙을 [0,1]로 변환 (차수 2n−1까지 정확)"""
    if n < 1:
        raise ConfigurationError(f"quadrature needs at least one node, got {n}")
    xi, wi = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (xi + 1.0)
    weights = 0.5 * wi
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, exactness=2 * n - 1)


def avf_gradient(grad: Callable, x, xp, quad: QuadratureRule) -> np.ndarray:
    """Σ_k w_k ∇H(x(1−α_k) + x′α_k)"""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape:
        raise ContractViolation(f"avf_gradient endpoints differ in shape: {x.shape} vs {xp.shape}")
    d = xp - x
    total = np.zeros_like(x)
    for alpha, w in zip(quad.nodes, quad.weights):
        total += w * np.asarray(grad(x + alpha * d), dtype=float)
    return total


def secant_gradient(H: Callable, grad: Callable, x, xp) -> np.ndarray:
    """중점 그래디언트 + 할선 보정. ‖d‖가 작으면 ∇H(x)"""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape:
        raise ContractViolation(f"secant_gradient endpoints differ in shape: {x.shape} vs {xp.shape}")
    d = xp - x
    dd = float(d @ d)
    if np.sqrt(dd) < QUADRATURE_CONFIG["secant_threshold"] * (1.0 + np.linalg.norm(x)):
        return np.asarray(grad(x), dtype=float)
    g_mid = np.asarray(grad(0.5 * (x + xp)), dtype=float)
    H0, H1 = float(H(x)), float(H(xp))
    defect = (H1 - H0) - float(g_mid @ d)
    # 반올림 수준의 결함은 0으로 취급 (작은 ‖d‖에서의 증폭 방지)
    if abs(defect) <= 4.0 * _EPS * (abs(H0) + abs(H1)):
        return g_mid
    return g_mid + (defect / dd) * d


class SchemeKind(str, Enum):
    AVF_QUADRATURE = "avf-quadrature"
    AVF_CLOSED_FORM = "avf-closed-form"
    SECANT = "midpoint-secant"


@dataclass(frozen=True, eq=False)
class DiscreteGradientScheme:
    """∇̄H(x, x′) 생성 규칙"""

    kind: SchemeKind
    quadrature: Optional[QuadratureRule] = None
    closed_form: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.AVF_QUADRATURE and self.quadrature is None:
            raise ConfigurationError("avf-quadrature scheme needs a quadrature rule")

    @classmethod
    def avf(cls, nodes: int = QUADRATURE_CONFIG["avf_nodes"]) -> "DiscreteGradientScheme":
        return cls(SchemeKind.AVF_QUADRATURE, quadrature=gauss_legendre(nodes))

    @classmethod
    def avf_closed_form(cls, fn: Optional[Callable] = None) -> "DiscreteGradientScheme":
        return cls(SchemeKind.AVF_CLOSED_FORM, closed_form=fn)

    @classmethod
    def secant(cls) -> "DiscreteGradientScheme":
        return cls(SchemeKind.SECANT)

    @classmethod
    def default_for(cls, sys: PortHamiltonianSystem) -> "DiscreteGradientScheme":
        """적분된 AVF가 있으면 closed-form, 없으면 secant"""
        if sys.averaged_gradient is not None:
            return cls.avf_closed_form()
        return cls.secant()

    @classmethod
    def avf_for(cls, sys: PortHamiltonianSystem, nodes: int = QUADRATURE_CONFIG["avf_nodes"]) -> "DiscreteGradientScheme":
        """AVF: 적분된 형태가 있으면 그것을, 없으면 구적법"""
        if sys.averaged_gradient is not None:
            return cls.avf_closed_form()
        return cls.avf(nodes)

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.AVF_QUADRATURE:
            return f"{self.kind.value}({self.quadrature.size})"
        return self.kind.value

    def __call__(self, sys: PortHamiltonianSystem, x: np.ndarray, xp: np.ndarray) -> np.ndarray:
        if self.kind is SchemeKind.AVF_QUADRATURE:
            return avf_gradient(sys.gradient, x, xp, self.quadrature)
        if self.kind is SchemeKind.AVF_CLOSED_FORM:
            fn = self.closed_form or sys.averaged_gradient
            if fn is None:
                raise ConfigurationError(f"system {sys.name} supplies no closed-form AVF gradient")
            return np.asarray(fn(x, xp), dtype=float)
        return secant_gradient(sys.hamiltonian, sys.gradient, x, xp)


@dataclass
class PropertyResiduals:
    """verify_properties 결과"""

    property1: float
    property2: float
    property1_scaled: float
    symmetry: float
    n_pairs: int


def verify_properties(scheme: DiscreteGradientScheme, sys: PortHamiltonianSystem, pairs: Sequence) -> PropertyResiduals:
    """쌍 (x, x′)마다 성질 1, 2의 최대 잔차와 대칭 결함"""
    if len(pairs) == 0:
        raise ContractViolation("verify_properties needs at least one pair")
    p1 = p1s = p2 = sym = 0.0
    for raw_x, raw_xp in pairs:
        x = as_state(raw_x, sys.state_dim)
        xp = as_state(raw_xp, sys.state_dim)
        g = scheme(sys, x, xp)
        H0, H1 = sys.energy(x), sys.energy(xp)
        r1 = abs(float(g @ (xp - x)) - (H1 - H0))
        p1 = max(p1, r1)
        p1s = max(p1s, r1 / (1.0 + max(abs(H0), abs(H1))))
        p2 = max(p2, float(np.linalg.norm(scheme(sys, x, x) - sys.gradient_at(x))))
        sym = max(sym, float(np.linalg.norm(g - scheme(sys, xp, x))))
    return PropertyResiduals(property1=p1, property2=p2, property1_scaled=p1s, symmetry=sym, n_pairs=len(pairs))
