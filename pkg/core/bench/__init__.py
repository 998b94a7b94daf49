"""
PHS Lab v1.0 — 벤치마크 (bench-cli)

번들 실험 실행, 방법 비교, CSV 출력.
"""

from core.bench.config import METHOD_NAMES, ExperimentConfig, load_config_file
from core.bench.presets import DEFAULT_EXPERIMENTS, load_presets, preset_for, verify_bundled_defaults
from core.bench.runner import ComparisonResult, RunResult, compare_methods, run_experiment

__all__ = [
    "DEFAULT_EXPERIMENTS",
    "METHOD_NAMES",
    "ComparisonResult",
    "ExperimentConfig",
    "RunResult",
    "compare_methods",
    "load_config_file",
    "load_presets",
    "preset_for",
    "run_experiment",
    "verify_bundled_defaults",
]
