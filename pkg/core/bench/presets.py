"""
PHS Lab v1.0 — 실험 프리셋 로더

config/experiments.yaml 을 읽고, 실패하면 DEFAULT_EXPERIMENTS 로 폴백합니다.
"""

from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Optional

from core.settings import get_settings

logger = logging.getLogger("phs.bench")

# YAML 로드
try:
    import yaml
    HAS_YAML = True
except ImportError:
    HAS_YAML = False


# 기본 프리셋 (YAML 로드 실패 시 폴백)
DEFAULT_EXPERIMENTS = {
    "rigid-body": {
        "h": 0.5, "steps": 120, "method": "avfphs",
        "solver": "newton-numeric-jacobian", "max_iter": 100,
        "params": {
            "inertia": [1.0, 2.0, 3.0],
            "damping_gains": [3.0, 4.0, 5.0],
            "stiffness_gains": [[3.0, 0.0, 0.0, 1.0], [0.0, 5.0, 0.0, 1.0], [0.0, 0.0, 6.0, 1.0]],
            "omega0": [1.0, -0.5, 0.8],
            "quaternion0": [0.5, 0.5, 0.5, 0.5],
        },
    },
    "pendulum": {
        "h": 0.5, "steps": 200, "method": "avfphs",
        "solver": "fixed-point", "max_iter": 100,
        "params": {"initial_state": [2.8, 1.4], "gain": 0.01},
    },
    "microphone": {
        "h": 0.5, "steps": 200, "method": "avfphs",
        "solver": "newton-numeric-jacobian", "max_iter": 200,
        "params": {"R": 100.0, "c": 0.1, "m": 4.0, "q_bar": 3.0, "gain": 0.5, "initial_state": [2.0, 1.0, 1.0]},
    },
}

# self-test 기준 매개변수
REFERENCE_PARAMETERS = {
    "rigid-body": {
        "h": 0.5,
        "inertia": [1.0, 2.0, 3.0],
        "damping_gains": [3.0, 4.0, 5.0],
        "stiffness_gains": [[3.0, 0.0, 0.0, 1.0], [0.0, 5.0, 0.0, 1.0], [0.0, 0.0, 6.0, 1.0]],
    },
    "pendulum": {"h": 0.5, "initial_state": [2.8, 1.4], "gain": 0.01},
    "microphone": {"h": 0.5, "R": 100.0, "c": 0.1, "m": 4.0, "q_bar": 3.0, "gain": 0.5},
}


def load_presets(path: Optional[Path] = None) -> dict:
    """experiments.yaml 로드 (실패 시 기본값)"""
    config_path = Path(path) if path else get_settings().resolved_experiments_file
    if HAS_YAML and config_path.exists():
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                cfg = yaml.safe_load(f) or {}
            experiments = cfg.get("experiments", {})
            if experiments:
                return experiments
        except (OSError, yaml.YAMLError) as exc:
            logger.warning("preset_load_failed path=%s error=%s", config_path, exc)
    return copy.deepcopy(DEFAULT_EXPERIMENTS)


def preset_for(name: str, path: Optional[Path] = None) -> dict:
    """한 실험의 평탄화된 매개변수 (h, steps, solver, max_iter + params)"""
    raw = load_presets(path).get(name, {})
    flat = {k: v for k, v in raw.items() if k != "params"}
    flat.update(raw.get("params", {}))
    return flat


def verify_bundled_defaults(path: Optional[Path] = None) -> list[str]:
    """프리셋이 기준 매개변수와 필드 단위로 일치하는지 검사하고 불일치 목록 반환"""
    mismatches = []
    for name, expected in REFERENCE_PARAMETERS.items():
        actual = preset_for(name, path)
        for key, value in expected.items():
            if actual.get(key) != value:
                mismatches.append(f"{name}.{key}: expected {value!r}, got {actual.get(key)!r}")
    return mismatches
