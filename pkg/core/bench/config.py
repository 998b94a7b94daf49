"""
PHS Lab v1.0 — 벤치마크 실행 설정 (ExperimentConfig)

CLI 플래그, --config 키=값 파일, 번들 프리셋 순으로 값을 결정합니다.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.experiments import EXPERIMENT_NAMES
from core.phs.exceptions import ConfigurationError

METHOD_NAMES = (
    "avfphs",
    "disgrad-secant",
    "collocation",
    "splitting",
    "implicit-midpoint",
    "plain-avf",
    "improved-euler",
)

_COLLOCATION_LABEL = re.compile(r"^collocation-(\d+)$")

# --config 파일에서 인식하는 키 (플래그 이름과 동일, '-' 는 '_')
CONFIG_KEYS = ("experiment", "method", "h", "steps", "stages", "tol", "max_iter", "out", "compare", "oracle_h", "oracle", "system")


def _split_method(label: str) -> tuple[str, Optional[int]]:
    """'collocation-3' → ('collocation', 3)"""
    match = _COLLOCATION_LABEL.match(label)
    if match:
        return "collocation", int(match.group(1))
    return label, None


def coerce_value(raw: Any) -> Any:
    """문자열 매개변수 → float / 리스트 / 원문"""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if "," in text:
        return [coerce_value(part) for part in text.split(",") if part.strip()]
    try:
        return float(text)
    except ValueError:
        return text


class ExperimentConfig(BaseModel):
    """단일 실행 / 비교 실행 설정. None 은 프리셋 값을 사용"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    method: str = "avfphs"
    h: Optional[float] = Field(None, gt=0.0)
    steps: Optional[int] = Field(None, ge=1)
    stages: int = Field(2, ge=1, le=10)
    tol: Optional[float] = Field(None, gt=0.0)
    max_iter: Optional[int] = Field(None, ge=1)
    out: Optional[Path] = None
    compare: tuple[str, ...] = ()
    oracle_h: Optional[float] = Field(None, gt=0.0)
    oracle: Literal["collocation", "dop853"] = "collocation"
    params: dict[str, Any] = Field(default_factory=dict)
    system: Optional[str] = None

    @field_validator("name")
    @classmethod
    def _known_experiment(cls, v: str) -> str:
        if v not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment '{v}', expected one of {EXPERIMENT_NAMES}")
        return v

    @field_validator("compare", mode="before")
    @classmethod
    def _split_compare(cls, v):
        if isinstance(v, str):
            return tuple(m.strip() for m in v.split(",") if m.strip())
        return v

    @model_validator(mode="after")
    def _known_methods(self) -> "ExperimentConfig":
        for label in (self.method,) + self.compare:
            if _split_method(label)[0] not in METHOD_NAMES:
                raise ValueError(f"unknown method '{label}', expected one of {METHOD_NAMES}")
        if self.name == "custom" and not (self.system or self.params.get("system")):
            raise ValueError("custom experiment requires system='module:factory'")
        return self

    @property
    def is_comparison(self) -> bool:
        return len(self.compare) > 0

    def method_and_stages(self, label: Optional[str] = None) -> tuple[str, int]:
        method, stages = _split_method(label or self.method)
        return method, stages or self.stages

    def experiment_params(self) -> dict:
        params = dict(self.params)
        if self.system:
            params["system"] = self.system
        return params


def load_config_file(path: str | Path) -> dict:
    """키=값 설정 파일 → ExperimentConfig 필드 dict ('param.X' 는 params 로)"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    values = dotenv_values(path)
    fields: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for key, raw in values.items():
        if raw is None:
            continue
        key = key.strip()
        if key.lower().startswith("param."):
            # 파라미터 이름은 대소문자 유지 (R, K_d ...)
            params[key[len("param."):]] = coerce_value(raw)
            continue
        key = key.lower().replace("-", "_")
        if key in CONFIG_KEYS:
            fields["name" if key == "experiment" else key] = raw
        else:
            raise ConfigurationError(f"unknown key '{key}' in {path}")
    if params:
        fields["params"] = params
    return fields


def parse_param_overrides(items: Optional[list[str]]) -> dict:
    """['R=50', 'initial_state=1,0.5'] → {'R': 50.0, 'initial_state': [1.0, 0.5]}"""
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigurationError(f"--param expects key=value, got '{item}'")
        key, value = item.split("=", 1)
        params[key.strip()] = coerce_value(value)
    return params
