"""
PHS Lab v1.0 — 벤치마크 CLI 테스트

설정 해석, 프리셋 검증, CSV 출력, 종료 코드, 방법 비교.

실행:
    python -m pytest tests/test_bench_cli.py -v
"""

import csv

import numpy as np
import pytest
from pydantic import ValidationError

from core.bench.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from core.bench.config import ExperimentConfig, coerce_value, load_config_file, parse_param_overrides
from core.bench.presets import DEFAULT_EXPERIMENTS, load_presets, preset_for, verify_bundled_defaults
from core.paths import PathRegistry
from core.phs.exceptions import ConfigurationError
from core.settings import PHSSettings


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


# ============================================================
# 설정
# ============================================================

class TestExperimentConfig:
    """ExperimentConfig 검증"""

    def test_defaults(self):
        cfg = ExperimentConfig(name="pendulum")
        assert cfg.method == "avfphs"
        assert cfg.h is None
        assert not cfg.is_comparison

    def test_unknown_experiment(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(name="double-pendulum")

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(name="pendulum", method="rk4")

    def test_negative_step(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(name="pendulum", h=-1.0)

    def test_collocation_label(self):
        cfg = ExperimentConfig(name="pendulum", method="collocation-3")
        assert cfg.method_and_stages() == ("collocation", 3)
        assert cfg.method_and_stages("collocation") == ("collocation", 2)

    def test_compare_string_is_split(self):
        cfg = ExperimentConfig(name="pendulum", compare="avfphs, improved-euler")
        assert cfg.compare == ("avfphs", "improved-euler")
        assert cfg.is_comparison

    def test_oracle_default_and_choices(self):
        assert ExperimentConfig(name="pendulum").oracle == "collocation"
        assert ExperimentConfig(name="pendulum", oracle="dop853").oracle == "dop853"
        with pytest.raises(ValidationError):
            ExperimentConfig(name="pendulum", oracle="rk45")

    def test_custom_needs_system(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(name="custom")


class TestConfigFile:
    """--config 키=값 파일"""

    def test_parse(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("experiment=microphone\nmethod=collocation-2\nsteps=5\nparam.R=50\nparam.initial_state=1,0,0.5\n")
        fields = load_config_file(path)
        assert fields["name"] == "microphone"
        assert fields["params"] == {"R": 50.0, "initial_state": [1.0, 0.0, 0.5]}
        cfg = ExperimentConfig(**fields)
        assert cfg.steps == 5

    def test_param_names_keep_case(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("Experiment=rigid-body\nPARAM.K_d=1,2,3\nparam.R=50\nOracle=dop853\n")
        fields = load_config_file(path)
        assert fields["name"] == "rigid-body"
        assert fields["params"] == {"K_d": [1.0, 2.0, 3.0], "R": 50.0}
        assert ExperimentConfig(**fields).oracle == "dop853"

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("experiment=pendulum\nwarp=9\n")
        with pytest.raises(ConfigurationError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config_file(tmp_path / "absent.env")

    def test_param_overrides(self):
        assert parse_param_overrides(["gain=0.02", "initial_state=1,2"]) == {"gain": 0.02, "initial_state": [1.0, 2.0]}
        with pytest.raises(ConfigurationError):
            parse_param_overrides(["gain"])

    def test_coerce_keeps_text(self):
        assert coerce_value("newton-numeric-jacobian") == "newton-numeric-jacobian"


class TestPresets:
    """번들 프리셋"""

    def test_bundled_defaults_match(self):
        assert verify_bundled_defaults() == []

    def test_tampered_preset_reported(self, tmp_path):
        path = tmp_path / "experiments.yaml"
        path.write_text("experiments:\n  pendulum:\n    h: 0.5\n    params:\n      initial_state: [2.8, 1.4]\n      gain: 0.02\n")
        mismatches = verify_bundled_defaults(path)
        assert any(line.startswith("pendulum.gain") for line in mismatches)

    def test_missing_file_falls_back(self, tmp_path):
        assert load_presets(tmp_path / "none.yaml") == DEFAULT_EXPERIMENTS

    def test_preset_is_flattened(self):
        flat = preset_for("microphone")
        assert flat["R"] == 100.0
        assert flat["solver"] == "newton-numeric-jacobian"


class TestSettings:
    """PHS_* 환경변수"""

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("PHS_MAX_WORKERS", "2")
        monkeypatch.setenv("PHS_OUTPUT_DIR", "/tmp/phs-out")
        settings = PHSSettings()
        assert settings.max_workers == 2
        assert str(settings.resolved_output_dir) == "/tmp/phs-out"


class TestPathRegistry:
    def test_names(self, tmp_path):
        paths = PathRegistry(tmp_path, "pendulum")
        assert paths.trajectory_csv("avfphs").name == "trajectory_avfphs.csv"
        assert paths.ledger_csv("collocation-2").name == "ledger_collocation-2.csv"
        assert paths.comparison_csv == tmp_path / "pendulum" / "comparison.csv"
        assert paths.list_outputs() == []


# ============================================================
# 단일 실행
# ============================================================

class TestRun:
    """phs-bench 단일 방법 실행"""

    def test_pendulum_csv(self, tmp_path, capsys):
        assert main(["pendulum", "--steps", "10", "--out", str(tmp_path)]) == EXIT_OK
        traj = _read_csv(tmp_path / "pendulum" / "trajectory_avfphs.csv")
        ledger = _read_csv(tmp_path / "pendulum" / "ledger_avfphs.csv")
        assert traj[0] == ["step", "t", "x_1", "x_2", "H", "y_1", "u_1"]
        assert len(traj) == 12
        assert traj[1][:4] == ["0", "0", "2.7999999999999998", "1.3999999999999999"]
        assert float(traj[-1][1]) == 5.0
        assert ledger[0] == ["step", "t", "H", "dH", "supply", "residual", "A_ext_cumulative", "dissipation"]
        assert len(ledger) == 11
        assert max(abs(float(r[5])) for r in ledger[1:]) < 1e-11
        out = capsys.readouterr().out
        assert "experiment=pendulum method=avfphs" in out
        assert "rotation_count=" in out

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["pendulum", "--steps", "15", "--out", str(a)]) == EXIT_OK
        assert main(["pendulum", "--steps", "15", "--out", str(b)]) == EXIT_OK
        for name in ("trajectory_avfphs.csv", "ledger_avfphs.csv"):
            assert (a / "pendulum" / name).read_bytes() == (b / "pendulum" / name).read_bytes()

    def test_rigid_body_reports_quaternion_norm(self, tmp_path, capsys):
        assert main(["--experiment", "rigid-body", "--method", "disgrad-secant", "--steps", "4", "--out", str(tmp_path)]) == EXIT_OK
        traj = _read_csv(tmp_path / "rigid-body" / "trajectory_disgrad-secant.csv")
        assert traj[0][-1] == "q_norm"
        assert len(traj[0]) == 2 + 7 + 1 + 3 + 3 + 1
        assert "final_q_norm=" in capsys.readouterr().out

    def test_collocation_label_in_filename(self, tmp_path):
        assert main(["pendulum", "--method", "collocation-3", "--steps", "3", "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "pendulum" / "trajectory_collocation-3.csv").exists()

    def test_one_stage_collocation(self, tmp_path):
        assert main(["pendulum", "--method", "collocation-1", "--steps", "3", "--out", str(tmp_path)]) == EXIT_OK
        ledger = _read_csv(tmp_path / "pendulum" / "ledger_collocation-1.csv")
        assert len(ledger) == 4

    def test_rigid_body_splitting_advances_2h(self, tmp_path):
        assert main(["rigid-body", "--method", "splitting", "--steps", "10", "--out", str(tmp_path)]) == EXIT_OK
        traj = _read_csv(tmp_path / "rigid-body" / "trajectory_splitting.csv")
        assert float(traj[-1][1]) == 10.0

    def test_config_file_with_param_override(self, tmp_path):
        cfg = tmp_path / "mic.env"
        cfg.write_text(f"experiment=microphone\nsteps=3\nout={tmp_path}\nparam.R=50\n")
        assert main(["--config", str(cfg), "--param", "gain=0.25"]) == EXIT_OK
        assert (tmp_path / "microphone" / "trajectory_avfphs.csv").exists()

    def test_custom_system(self, tmp_path):
        argv = ["custom", "--system", "core.experiments:damped_oscillator_experiment", "--steps", "5", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        assert (tmp_path / "custom" / "ledger_avfphs.csv").exists()


class TestExitCodes:
    """종료 코드 0 / 1 / 2"""

    def test_negative_step_is_config_error(self, tmp_path):
        assert main(["pendulum", "--h", "-1", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_experiment(self, tmp_path):
        assert main(["double-pendulum", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_experiment(self):
        assert main([]) == EXIT_CONFIG

    def test_bad_flag(self):
        assert main(["pendulum", "--steps", "many"]) == EXIT_CONFIG

    def test_splitting_needs_rigid_body(self, tmp_path):
        assert main(["pendulum", "--method", "splitting", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_solver_failure_reports_step(self, tmp_path, capsys):
        code = main(["pendulum", "--max-iter", "1", "--tol", "1e-15", "--steps", "5", "--out", str(tmp_path)])
        assert code == EXIT_SOLVER
        assert "step failure at step 1" in capsys.readouterr().err
        # 부분 궤적 (초기 상태만)
        traj = _read_csv(tmp_path / "pendulum" / "trajectory_avfphs.csv")
        assert len(traj) == 2

    def test_self_test(self, capsys):
        assert main(["--self-test"]) == EXIT_OK
        assert "self_test=ok" in capsys.readouterr().out

    def test_help(self):
        assert main(["--help"]) == EXIT_OK


# ============================================================
# 방법 비교
# ============================================================

class TestCompare:
    """--compare 비교표"""

    def test_comparison_table(self, tmp_path, capsys):
        argv = ["pendulum", "--compare", "avfphs,improved-euler", "--steps", "20", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        table = _read_csv(tmp_path / "pendulum" / "comparison.csv")
        header = table[0]
        assert header[:5] == ["step", "t", "oracle:x_1", "oracle:x_2", "oracle:H"]
        assert "avfphs:H_err" in header
        assert header.index("avfphs:x_1") < header.index("improved-euler:x_1")
        assert len(table) == 22
        # 초기 행은 오라클과 동일
        assert float(table[1][header.index("avfphs:H_err")]) == 0.0
        assert (tmp_path / "pendulum" / "trajectory_improved-euler.csv").exists()
        out = capsys.readouterr().out
        assert "avfphs: max_H_error=" in out
        assert "oracle: rotation_count=" in out

    def test_single_method_matches_trajectory(self, tmp_path):
        argv = ["pendulum", "--compare", "avfphs", "--steps", "8", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        table = _read_csv(tmp_path / "pendulum" / "comparison.csv")
        traj = _read_csv(tmp_path / "pendulum" / "trajectory_avfphs.csv")
        header = table[0]
        cols = [header.index(c) for c in ("avfphs:x_1", "avfphs:x_2", "avfphs:H", "avfphs:u_1")]
        for trow, crow in zip(traj[1:], table[1:]):
            assert [crow[c] for c in cols] == [trow[2], trow[3], trow[4], trow[6]]

    def test_oracle_tracks_energy_method(self, tmp_path):
        argv = ["microphone", "--compare", "avfphs", "--steps", "10", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        table = _read_csv(tmp_path / "microphone" / "comparison.csv")
        errors = np.array([float(r[table[0].index("avfphs:H_err")]) for r in table[1:]])
        assert errors.max() < 0.3

    def test_dop853_oracle_selectable(self, tmp_path, capsys):
        argv = ["pendulum", "--compare", "avfphs", "--steps", "6", "--oracle", "dop853", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        table = _read_csv(tmp_path / "pendulum" / "comparison.csv")
        assert len(table) == 8
        assert "avfphs: max_H_error=" in capsys.readouterr().out

    def test_oracle_step_sets_reference_grid(self, tmp_path):
        argv = ["pendulum", "--compare", "avfphs", "--steps", "4", "--oracle-h", "0.01", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK

    def test_oracle_step_off_grid_is_config_error(self, tmp_path):
        argv = ["pendulum", "--compare", "avfphs", "--steps", "4", "--oracle-h", "0.3", "--out", str(tmp_path)]
        assert main(argv) == EXIT_CONFIG

    def test_unknown_oracle_flag(self, tmp_path):
        assert main(["pendulum", "--compare", "avfphs", "--oracle", "rk45", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_splitting_rejected_in_multi_compare(self, tmp_path):
        argv = ["rigid-body", "--compare", "avfphs,splitting", "--steps", "2", "--out", str(tmp_path)]
        assert main(argv) == EXIT_CONFIG

    def test_duplicate_methods_rejected(self, tmp_path):
        argv = ["pendulum", "--compare", "collocation,collocation-2", "--steps", "2", "--out", str(tmp_path)]
        assert main(argv) == EXIT_CONFIG
