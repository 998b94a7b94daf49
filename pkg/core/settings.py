"""
PHS Lab v1.0 — 실행 환경 설정 (Pydantic BaseSettings)

환경변수(PHS_*) 또는 .env 파일에서 자동 로드
수치 기본값은 core.config 상수에서 가져옴
"""

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

from core.config import AUDIT_CONFIG, EXPERIMENTS_FILE, OUTPUT_DIR, SOLVER_CONFIG


class PHSSettings(BaseSettings):
    """PHS Lab 전역 설정"""

    model_config = SettingsConfigDict(
        env_prefix="PHS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # ─── 로깅 ───
    log_level: str = "WARNING"

    # ─── 솔버 ───
    solver_tolerance: float = SOLVER_CONFIG["tolerance"]
    max_iterations: int = SOLVER_CONFIG["max_iterations"]
    oracle_rtol: float = AUDIT_CONFIG["oracle_rtol"]

    # ─── 병렬 비교 ───
    max_workers: int = 4

    # ─── 경로 ───
    output_dir: str = ""               # 비어있으면 프로젝트 루트/output 사용
    experiments_file: str = ""         # 비어있으면 config/experiments.yaml

    @property
    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir) if self.output_dir else OUTPUT_DIR

    @property
    def resolved_experiments_file(self) -> Path:
        return Path(self.experiments_file) if self.experiments_file else EXPERIMENTS_FILE


@lru_cache()
def get_settings() -> PHSSettings:
    """설정 싱글톤 (캐시됨)"""
    return PHSSettings()
