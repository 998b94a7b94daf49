"""
PHS Lab - 벤치마크 실행 스크립트
설치 없이 저장소에서 바로 phs-bench 를 실행합니다.

실행:
    python scripts/run_benchmark.py pendulum --compare avfphs,plain-avf,implicit-midpoint,improved-euler
"""

import sys
from pathlib import Path

# 프로젝트 루트
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from core.bench.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
