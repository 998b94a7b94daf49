"""
PHS Lab v1.0 — PathRegistry (경로 중앙 관리)

벤치마크 출력의 모든 경로를 단일 객체로 관리
CSV 를 쓰는 함수와 읽는 함수(테스트 포함)가 동일한 경로 객체를 참조
"""

from pathlib import Path

from core.config import CSV_CONFIG


class PathRegistry:
    """실험 출력 파일 경로 중앙 관리

    사용 예:
        paths = PathRegistry("output", "pendulum")
        paths.ensure_dirs()
        paths.trajectory_csv("avfphs")   # output/pendulum/trajectory_avfphs.csv
        paths.ledger_csv("avfphs")       # output/pendulum/ledger_avfphs.csv
    """

    def __init__(self, base_dir: str | Path, experiment: str):
        self.base = Path(base_dir)
        self.experiment = experiment
        self.run_dir = self.base / experiment

    def ensure_dirs(self):
        """출력 디렉토리 생성"""
        self.run_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def _slug(method: str) -> str:
        return method.replace("/", "_").replace(" ", "_")

    def trajectory_csv(self, method: str) -> Path:
        return self.run_dir / f"{CSV_CONFIG['trajectory_prefix']}_{self._slug(method)}.csv"

    def ledger_csv(self, method: str) -> Path:
        return self.run_dir / f"{CSV_CONFIG['ledger_prefix']}_{self._slug(method)}.csv"

    @property
    def comparison_csv(self) -> Path:
        return self.run_dir / f"{CSV_CONFIG['comparison_prefix']}.csv"

    def list_outputs(self) -> list[Path]:
        """생성된 CSV 목록 (정렬됨)"""
        if not self.run_dir.exists():
            return []
        return sorted(p for p in self.run_dir.iterdir() if p.suffix == ".csv")

    def __repr__(self) -> str:
        return f"PathRegistry(base='{self.base}', experiment='{self.experiment}', files={len(self.list_outputs())})"
