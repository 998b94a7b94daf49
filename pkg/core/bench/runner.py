"""
PHS Lab v1.0 — 벤치마크 실행기

run_experiment  : 한 방법으로 적분 → 궤적 CSV + 장부 CSV + 요약(stdout)
compare_methods : 여러 방법을 병렬 적분 → 방법별 CSV + 오라클 정렬 비교표

CSV 형식
  trajectory : step,t,x_1..x_n,H,y_1..y_m,u_1..u_m[,q_norm]
  ledger     : step,t,H,dH,supply,residual,A_ext_cumulative,dissipation
  comparison : step,t,oracle:x_i,oracle:H,oracle:u_j,<method>:x_i,<method>:H,<method>:H_err,<method>:u_j ...
"""

from __future__ import annotations

import csv
import logging
import sys as _sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

import numpy as np

from core.bench.config import ExperimentConfig
from core.bench.presets import preset_for
from core.config import CSV_CONFIG
from core.experiments import Experiment, build_experiment
from core.experiments.pendulum import rotation_count
from core.paths import PathRegistry
from core.phs.audit import BalanceLedger, build_ledger, reference_solution
from core.phs.exceptions import ConfigurationError, StepFailure
from core.phs.integrators import StepperConfig, integrate_method, integrate_splitting
from core.phs.system import ControlLaw, PortHamiltonianSystem, Trajectory, closed_loop_input, eval_output
from core.settings import get_settings

logger = logging.getLogger("phs.bench")


def _fmt(value: float) -> str:
    return format(float(value), CSV_CONFIG["float_format"])


# ============================================================
# 설정 해석
# ============================================================

@dataclass(frozen=True, eq=False)
class ResolvedRun:
    """프리셋 + 재정의가 적용된 실행 단위"""

    experiment: Experiment
    stepper: StepperConfig
    steps: int


def resolve_run(cfg: ExperimentConfig) -> ResolvedRun:
    params = {} if cfg.name == "custom" else preset_for(cfg.name)
    params.update(cfg.experiment_params())
    if cfg.h is not None:
        params["h"] = cfg.h
    if cfg.steps is not None:
        params["steps"] = cfg.steps
    experiment = build_experiment(cfg.name, params)

    settings = get_settings()
    stepper = StepperConfig(
        step_size=experiment.step_size,
        solver_tolerance=cfg.tol if cfg.tol is not None else settings.solver_tolerance,
        max_iterations=cfg.max_iter if cfg.max_iter is not None else experiment.max_iterations,
        solver_kind=experiment.solver_kind,
    )
    return ResolvedRun(experiment, stepper, experiment.steps)


def _system_for(run: ResolvedRun, method: str) -> tuple[PortHamiltonianSystem, ControlLaw]:
    if method == "splitting":
        setup = run.experiment.splitting()
        return setup.system, setup.law
    return run.experiment.system, run.experiment.law


def integrate_run(run: ResolvedRun, method: str, stages: int) -> Trajectory:
    """방법 하나로 적분. 실패 시 부분 궤적을 담은 StepFailure"""
    exp = run.experiment
    if method == "splitting":
        if exp.splitting is None:
            raise ConfigurationError(f"splitting is only available for the rigid body, not '{exp.name}'")
        setup = exp.splitting()
        return integrate_splitting(setup.spec, setup.system, setup.law, setup.initial_state, run.steps, run.stepper.step_size)
    return integrate_method(method, exp.system, exp.law, exp.initial_state, run.steps, run.stepper, stages=stages)


# ============================================================
# CSV 출력
# ============================================================

def trajectory_rows(traj: Trajectory, sys: PortHamiltonianSystem, law: ControlLaw, diagnostics=None) -> tuple[list, list]:
    """(헤더, 행 목록). 행 0 은 초기 상태"""
    n, m = sys.state_dim, sys.port_dim
    header = ["step", "t"] + [f"x_{i + 1}" for i in range(n)] + ["H"]
    header += [f"y_{j + 1}" for j in range(m)] + [f"u_{j + 1}" for j in range(m)]
    extra = list(diagnostics(traj.initial_state)) if diagnostics else []
    header += extra

    def row(step, t, x, H, y, u):
        values = [t, *x, H, *y, *u]
        if diagnostics:
            values += [diagnostics(x)[k] for k in extra]
        return [str(step)] + [_fmt(v) for v in values]

    rows = [row(0, traj.initial_time, traj.initial_state, traj.initial_energy, traj.initial_output, traj.initial_input)]
    for rec in traj.records:
        y = eval_output(sys, rec.state)
        u = closed_loop_input(sys, law, rec.state, rec.time)
        rows.append(row(rec.index, rec.time, rec.state, rec.energy, y, u))
    return header, rows


def ledger_rows(ledger: BalanceLedger) -> tuple[list, list]:
    header = ["step", "t", "H", "dH", "supply", "residual", "A_ext_cumulative", "dissipation"]
    rows = [
        [str(r.step)] + [_fmt(v) for v in (r.time, r.energy, r.delta_energy, r.supply, r.residual, r.a_ext_cumulative, r.dissipation)]
        for r in ledger.rows
    ]
    return header, rows


def write_csv(path: Path, header: list, rows: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


@dataclass
class RunResult:
    method: str
    trajectory: Trajectory
    ledger: Optional[BalanceLedger]
    trajectory_csv: Path
    ledger_csv: Optional[Path]
    failure: Optional[StepFailure] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _emit_run(run: ResolvedRun, method: str, label: str, traj: Trajectory, paths: PathRegistry, failure=None) -> RunResult:
    sys, law = _system_for(run, method)
    header, rows = trajectory_rows(traj, sys, law, run.experiment.diagnostics)
    traj_path = write_csv(paths.trajectory_csv(label), header, rows)
    ledger, ledger_path = None, None
    if traj.records:
        ledger = build_ledger(traj)
        header, rows = ledger_rows(ledger)
        ledger_path = write_csv(paths.ledger_csv(label), header, rows)
    return RunResult(label, traj, ledger, traj_path, ledger_path, failure)


def _execute(run: ResolvedRun, cfg: ExperimentConfig, label: str, paths: PathRegistry) -> RunResult:
    method, stages = cfg.method_and_stages(label)
    display = f"collocation-{stages}" if method == "collocation" else method
    logger.info("run_start experiment=%s method=%s h=%g steps=%d", run.experiment.name, display, run.stepper.step_size, run.steps)
    try:
        traj = integrate_run(run, method, stages)
    except StepFailure as exc:
        return _emit_run(run, method, display, exc.trajectory, paths, exc)
    return _emit_run(run, method, display, traj, paths)


def print_summary(result: RunResult, experiment: Experiment, out: Optional[TextIO] = None) -> None:
    out = out if out is not None else _sys.stdout
    traj = result.trajectory
    final_H = traj.records[-1].energy if traj.records else traj.initial_energy
    print("=" * 50, file=out)
    print(f"experiment={experiment.name} method={result.method} h={_fmt(traj.step_size)} steps={len(traj)}", file=out)
    print(f"initial_H={_fmt(traj.initial_energy)}", file=out)
    print(f"final_H={_fmt(final_H)}", file=out)
    if result.ledger is not None:
        print(f"max_residual={_fmt(result.ledger.max_residual)}", file=out)
        print(f"exchange_defect={_fmt(result.ledger.exchange_defect)}", file=out)
    iterations = traj.total_iterations
    print(f"solver_iterations total={iterations} mean={iterations / max(len(traj), 1):.2f}", file=out)
    if experiment.name == "pendulum" and traj.records:
        print(f"rotation_count={rotation_count(traj.final_state[0])}", file=out)
    if experiment.diagnostics and traj.records:
        for key, value in experiment.diagnostics(traj.final_state).items():
            print(f"final_{key}={_fmt(value)}", file=out)
    print(f"trajectory_csv={result.trajectory_csv}", file=out)
    if result.ledger_csv:
        print(f"ledger_csv={result.ledger_csv}", file=out)


def run_experiment(cfg: ExperimentConfig, out: Optional[TextIO] = None) -> RunResult:
    """단일 방법 실행. 스텝 실패 시 부분 CSV 를 쓰고 StepFailure 를 다시 발생"""
    run = resolve_run(cfg)
    paths = PathRegistry(cfg.out or get_settings().resolved_output_dir, run.experiment.name)
    paths.ensure_dirs()
    result = _execute(run, cfg, cfg.method, paths)
    print_summary(result, run.experiment, out)
    if result.failure is not None:
        raise result.failure
    return result


# ============================================================
# 방법 비교
# ============================================================

@dataclass
class ComparisonResult:
    methods: list
    results: dict
    oracle_states: np.ndarray
    oracle_energies: np.ndarray
    max_energy_error: dict
    table_csv: Path
    rotation_counts: dict = field(default_factory=dict)

    @property
    def failures(self) -> dict:
        return {m: r.failure for m, r in self.results.items() if r.failure is not None}


def compare_methods(cfg: ExperimentConfig, out: Optional[TextIO] = None) -> ComparisonResult:
    """여러 방법을 같은 시간 격자에서 비교. 실패한 방법은 부분 열로 남기고 표 작성 후 첫 실패를 발생"""
    out = out if out is not None else _sys.stdout
    methods = list(cfg.compare) or [cfg.method]
    if any(cfg.method_and_stages(m)[0] == "splitting" for m in methods) and len(methods) > 1:
        raise ConfigurationError("splitting advances 2h per step and cannot share a comparison grid")
    labels = []
    for m in methods:
        method, stages = cfg.method_and_stages(m)
        labels.append(f"collocation-{stages}" if method == "collocation" else method)
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate methods in comparison: {labels}")

    run = resolve_run(cfg)
    exp = run.experiment
    paths = PathRegistry(cfg.out or get_settings().resolved_output_dir, exp.name)
    paths.ensure_dirs()
    settings = get_settings()

    results: dict[str, RunResult] = {}
    with ThreadPoolExecutor(max_workers=settings.max_workers, thread_name_prefix="method") as pool:
        futures = {pool.submit(_execute, run, cfg, m, paths): label for m, label in zip(methods, labels)}
        for future in as_completed(futures):
            label = futures[future]
            results[label] = future.result()
            logger.info("run_done method=%s steps=%d ok=%s", label, len(results[label].trajectory), results[label].ok)

    first_method = cfg.method_and_stages(methods[0])[0]
    system, law = _system_for(run, first_method)
    x0 = exp.splitting().initial_state if first_method == "splitting" else exp.initial_state
    h = results[labels[0]].trajectory.step_size
    times = np.arange(run.steps + 1) * h
    logger.info("oracle_start kind=%s h_ref=%s steps=%d", cfg.oracle, cfg.oracle_h or "auto", run.steps)
    oracle = reference_solution(system, law, x0, times, kind=cfg.oracle, h_ref=cfg.oracle_h, rtol=settings.oracle_rtol)
    oracle_H = np.array([system.energy(x) for x in oracle])

    n, m = system.state_dim, system.port_dim
    header = ["step", "t"] + [f"oracle:x_{i + 1}" for i in range(n)] + ["oracle:H"] + [f"oracle:u_{j + 1}" for j in range(m)]
    for label in labels:
        header += [f"{label}:x_{i + 1}" for i in range(n)] + [f"{label}:H", f"{label}:H_err"] + [f"{label}:u_{j + 1}" for j in range(m)]

    max_err = {}
    rows = []
    for k, t in enumerate(times):
        u_oracle = closed_loop_input(system, law, oracle[k], t)
        row = [str(k), _fmt(t)] + [_fmt(v) for v in oracle[k]] + [_fmt(oracle_H[k])] + [_fmt(v) for v in u_oracle]
        for label in labels:
            traj = results[label].trajectory
            if k == 0:
                x, H = traj.initial_state, traj.initial_energy
            elif k <= len(traj):
                rec = traj.records[k - 1]
                x, H = rec.state, rec.energy
            else:
                row += [""] * (n + m + 2)
                continue
            err = abs(H - oracle_H[k])
            max_err[label] = max(max_err.get(label, 0.0), err)
            u = closed_loop_input(system, law, x, t)
            row += [_fmt(v) for v in x] + [_fmt(H), _fmt(err)] + [_fmt(v) for v in u]
        rows.append(row)
    table = write_csv(paths.comparison_csv, header, rows)

    rotations = {}
    if exp.name == "pendulum":
        rotations["oracle"] = rotation_count(oracle[-1][0])
        for label in labels:
            traj = results[label].trajectory
            if results[label].ok:
                rotations[label] = rotation_count(traj.final_state[0])

    print("=" * 50, file=out)
    print(f"experiment={exp.name} h={_fmt(h)} steps={run.steps} methods={','.join(labels)}", file=out)
    for label in labels:
        r = results[label]
        status = "ok" if r.ok else f"failed_at_step={r.failure.step_index}"
        line = f"{label}: max_H_error={_fmt(max_err.get(label, float('nan')))} status={status}"
        if label in rotations:
            line += f" rotation_count={rotations[label]}"
        print(line, file=out)
    if "oracle" in rotations:
        print(f"oracle: rotation_count={rotations['oracle']}", file=out)
    print(f"comparison_csv={table}", file=out)

    comparison = ComparisonResult(labels, results, oracle, oracle_H, max_err, table, rotations)
    failures = comparison.failures
    if failures:
        raise next(iter(failures[label] for label in labels if label in failures))
    return comparison
