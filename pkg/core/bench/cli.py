"""
PHS Lab v1.0 — 벤치마크 CLI

사용 예:
    phs-bench pendulum --method avfphs --h 0.5 --steps 200
    phs-bench rigid-body --method disgrad-secant --steps 120 --out output
    phs-bench pendulum --compare avfphs,plain-avf,implicit-midpoint,improved-euler
    phs-bench --config runs/microphone.env --param R=50
    phs-bench --self-test

종료 코드: 0 성공, 1 설정 오류, 2 솔버/스텝 실패. 진단 메시지는 모두 stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from core.bench.config import METHOD_NAMES, ExperimentConfig, load_config_file, parse_param_overrides
from core.bench.presets import verify_bundled_defaults
from core.bench.runner import compare_methods, run_experiment
from core.experiments import EXPERIMENT_NAMES
from core.phs.exceptions import ConfigurationError, ContractViolation, SolverFailure, StepFailure
from core.settings import get_settings

logger = logging.getLogger("phs.bench")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phs-bench", description="PHS Lab 포트-해밀토니안 적분기 벤치마크")
    parser.add_argument("experiment_name", nargs="?", help=f"실험 이름: {', '.join(EXPERIMENT_NAMES)}")
    parser.add_argument("--experiment", dest="experiment", help="실험 이름 (위치 인자 대신)")
    parser.add_argument("--method", help=f"적분 방법: {', '.join(METHOD_NAMES)} (collocation-s 허용)")
    parser.add_argument("--h", type=float, help="스텝 크기 (기본: 프리셋)")
    parser.add_argument("--steps", type=int, help="스텝 수 (기본: 프리셋)")
    parser.add_argument("--stages", type=int, help="콜로케이션 단계 수 s")
    parser.add_argument("--tol", type=float, help="암시적 솔버 허용 오차")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help="암시적 솔버 최대 반복")
    parser.add_argument("--out", help="출력 디렉토리")
    parser.add_argument("--compare", help="비교할 방법 목록 (쉼표 구분)")
    parser.add_argument("--oracle", choices=("collocation", "dop853"), help="기준 해: Gauss s=3 콜로케이션(기본) 또는 solve_ivp DOP853")
    parser.add_argument("--oracle-h", dest="oracle_h", type=float, help="기준 해 스텝 (기본: h/100, dop853 은 최대 스텝)")
    parser.add_argument("--config", help="키=값 설정 파일")
    parser.add_argument("--param", action="append", default=[], help="실험 매개변수 재정의 key=value (반복 가능)")
    parser.add_argument("--system", help="custom 실험 팩토리 'module:factory'")
    parser.add_argument("--self-test", dest="self_test", action="store_true", help="번들 프리셋 검증 후 종료")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """--config 파일 값 위에 CLI 플래그를 덮어씀"""
    fields = load_config_file(args.config) if args.config else {}
    name = args.experiment or args.experiment_name
    if name:
        fields["name"] = name
    for key in ("method", "h", "steps", "stages", "tol", "max_iter", "out", "compare", "oracle_h", "oracle", "system"):
        value = getattr(args, key)
        if value is not None:
            fields[key] = value
    overrides = parse_param_overrides(args.param)
    if overrides:
        fields["params"] = {**fields.get("params", {}), **overrides}
    if "name" not in fields:
        raise ConfigurationError("no experiment given (positional, --experiment or 'experiment=' in --config)")
    return ExperimentConfig(**fields)


def configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    root = logging.getLogger("phs")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False


def self_test() -> int:
    mismatches = verify_bundled_defaults()
    for line in mismatches:
        print(f"[ERROR] preset mismatch {line}", file=sys.stderr)
    if mismatches:
        return EXIT_CONFIG
    print("self_test=ok")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings.log_level)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse 오류(2)는 설정 오류로 보고
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    if args.self_test:
        return self_test()

    try:
        cfg = config_from_args(args)
        if cfg.is_comparison:
            compare_methods(cfg)
        else:
            run_experiment(cfg)
    except StepFailure as exc:
        print(f"[ERROR] step failure at step {exc.step_index}: {exc.cause}", file=sys.stderr)
        return EXIT_SOLVER
    except SolverFailure as exc:
        print(f"[ERROR] solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, ContractViolation, ValidationError) as exc:
        print(f"[ERROR] configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
