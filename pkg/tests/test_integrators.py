"""
PHS Lab v1.0 — 적분기 테스트

이산 그래디언트 / AVF-PHS 스텝, Gauss 콜로케이션, 분할, 비교용 고전 방법, 궤적 적분.

실행:
    python -m pytest tests/test_integrators.py -v
"""

import numpy as np
import pytest

from core.experiments.linear import random_linear_system
from core.experiments.pendulum import arctan_damping, pendulum_system
from core.experiments.rigid_body import damping_flow, free_spin_flow, momentum_system, splitting_setup
from core.phs.audit import build_ledger, collocation_oracle, lyapunov_decrease
from core.phs.disgrad import DiscreteGradientScheme
from core.phs.exceptions import ConfigurationError, ContractViolation, StepFailure
from core.phs.integrators import (
    CollocationTableau,
    SplittingSpec,
    StepperConfig,
    integrate,
    integrate_method,
    integrate_splitting,
    make_stepper,
    splitting_substeps,
    step_avfphs,
    step_collocation,
    step_disgrad,
    step_reference,
    step_splitting,
)
from core.phs.system import ControlLaw


def _cfg(experiment, **overrides):
    values = dict(
        step_size=experiment.step_size,
        solver_kind=experiment.solver_kind,
        max_iterations=experiment.max_iterations,
    )
    values.update(overrides)
    return StepperConfig(**values)


class TestDiscreteGradientStep:
    """이산 그래디언트 한 스텝"""

    def test_single_step_balance(self, pendulum):
        x1, record = step_disgrad(
            pendulum.system, DiscreteGradientScheme.secant(), pendulum.law,
            pendulum.initial_state, _cfg(pendulum),
        )
        dH = pendulum.system.energy(x1) - pendulum.system.energy(pendulum.initial_state)
        assert dH == pytest.approx(record.supply + record.dissipation, abs=1e-12)
        assert record.index == 1
        assert record.time == pytest.approx(0.5)
        assert record.stage_weights == pytest.approx([1.0])

    def test_damping_step_dissipates(self, pendulum):
        x1, record = step_avfphs(pendulum.system, pendulum.law, pendulum.initial_state, _cfg(pendulum))
        assert record.supply < 0.0
        assert pendulum.system.energy(x1) < pendulum.system.energy(pendulum.initial_state)

    def test_zero_control_conserves_energy(self):
        sys = pendulum_system()
        traj = integrate(make_stepper("avfphs"), sys, ControlLaw.zero(), [2.8, 1.4], 200, StepperConfig(step_size=0.5))
        assert np.max(np.abs(traj.energies - traj.initial_energy)) <= 1e-10

    def test_local_error_is_third_order(self):
        # 한 스텝 오차 비: h → h/2 에서 ≈ 8
        sys, law, x0 = pendulum_system(), arctan_damping(), np.array([1.0, 0.5])
        errors = []
        for h in (0.1, 0.05):
            x1, _ = step_avfphs(sys, law, x0, StepperConfig(step_size=h, solver_tolerance=1e-14))
            exact = collocation_oracle(sys, law, x0, [h], h_ref=h / 1000)[-1]
            errors.append(float(np.linalg.norm(x1 - exact)))
        assert errors[0] / errors[1] == pytest.approx(8.0, abs=1.0)

    def test_microphone_passivity_inequality(self, microphone):
        traj = integrate_method("avfphs", microphone.system, microphone.law, microphone.initial_state, 40, _cfg(microphone))
        ledger = build_ledger(traj)
        assert ledger.within(1e-11)
        assert ledger.total_dissipation < 0.0
        assert all(r.delta_energy <= r.supply + 1e-11 for r in ledger.rows)

    def test_rigid_body_secant_balance(self, rigid_body):
        traj = integrate_method("disgrad-secant", rigid_body.system, rigid_body.law, rigid_body.initial_state, 120, _cfg(rigid_body))
        ledger = build_ledger(traj)
        assert ledger.exchange_defect <= 1e-12 * abs(traj.initial_energy)


class TestLinearMidpointEquivalence:
    """선형 시스템에서 AVF-PHS = 암시적 중점법"""

    def test_steps_agree(self):
        sys = random_linear_system(n=4, m=2, seed=3)
        law = ControlLaw.output_feedback(lambda y: 0.5 * y)
        cfg = StepperConfig(step_size=0.05, solver_tolerance=1e-14, solver_kind="newton-numeric-jacobian")
        x = np.array([1.0, -0.5, 0.25, 0.8])
        for n in range(100):
            x_avf, _ = step_avfphs(sys, law, x, cfg, t_n=n * 0.05)
            x_mid = step_reference("implicit-midpoint", sys, law, x, cfg, t_n=n * 0.05)
            assert np.max(np.abs(x_avf - x_mid)) <= 1e-13 * (1.0 + np.max(np.abs(x)))
            x = x_avf


class TestCollocationTableau:
    """콜로케이션 계수"""

    def test_gauss_two_stage(self):
        tab = CollocationTableau.gauss(2)
        assert tab.nodes == pytest.approx([0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0])
        assert tab.weights == pytest.approx([0.5, 0.5])
        np.testing.assert_allclose(
            tab.stage_matrix,
            [[0.25, 0.25 - np.sqrt(3.0) / 6.0], [0.25 + np.sqrt(3.0) / 6.0, 0.25]],
            rtol=1e-12,
            atol=1e-15,
        )

    def test_gauss_one_stage(self):
        tab = CollocationTableau.gauss(1)
        np.testing.assert_allclose(tab.nodes, [0.5])
        np.testing.assert_allclose(tab.weights, [1.0])
        np.testing.assert_allclose(tab.stage_matrix, [[0.5]])

    def test_node_outside_interval_rejected(self):
        with pytest.raises(ConfigurationError):
            CollocationTableau.from_nodes([0.0, 0.5])

    def test_negative_weight_rejected(self):
        with pytest.raises(ConfigurationError):
            CollocationTableau.from_nodes([0.1, 0.2, 0.3])

    def test_zero_stages_rejected(self):
        with pytest.raises(ConfigurationError):
            CollocationTableau.gauss(0)


class TestCollocationStep:
    """평균 그래디언트 콜로케이션 스텝"""

    def test_one_stage_matches_avfphs(self, pendulum):
        cfg = _cfg(pendulum, step_size=0.1)
        x_col, _ = step_collocation(pendulum.system, CollocationTableau.gauss(1), pendulum.law, pendulum.initial_state, cfg)
        x_avf, _ = step_avfphs(pendulum.system, pendulum.law, pendulum.initial_state, cfg)
        assert x_col == pytest.approx(x_avf, abs=1e-11)

    @pytest.mark.parametrize("stages", [1, 2, 3])
    def test_stage_record(self, pendulum, stages):
        _, record = step_collocation(pendulum.system, CollocationTableau.gauss(stages), pendulum.law, pendulum.initial_state, _cfg(pendulum))
        assert len(record.stage_outputs) == stages
        assert len(record.discrete_gradients) == stages
        assert record.stage_weights.sum() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("stages", [1, 2, 3])
    def test_pendulum_ledger(self, pendulum, stages):
        traj = integrate_method("collocation", pendulum.system, pendulum.law, pendulum.initial_state, 100, _cfg(pendulum), stages=stages)
        assert traj.method_name == f"collocation-{stages}"
        assert build_ledger(traj).max_residual <= 1e-10

    @pytest.mark.parametrize("stages", [1, 2, 3])
    def test_zero_control_conserves_energy(self, stages):
        sys = pendulum_system()
        cfg = StepperConfig(step_size=0.5, solver_tolerance=1e-14)
        traj = integrate_method("collocation", sys, ControlLaw.zero(), [2.8, 1.4], 100, cfg, stages=stages)
        assert np.max(np.abs(traj.energies - traj.initial_energy)) <= 1e-11


class TestSplitting:
    """비음수 계수 분할"""

    def test_strang_legs(self):
        spec = SplittingSpec.strang(lambda x, t: x, lambda x, t: x)
        assert spec.legs() == [(2, 0.25), (1, 0.5), (2, 0.5), (1, 0.5), (2, 0.25)]

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ConfigurationError):
            SplittingSpec(lambda x, t: x, lambda x, t: x, a=(-0.25, 1.5), b=(0.5,))

    def test_coefficient_sums_checked(self):
        with pytest.raises(ConfigurationError):
            SplittingSpec(lambda x, t: x, lambda x, t: x, a=(0.25, 0.25), b=(0.5,))

    def test_step_advances_twice_h(self):
        # 두 부분 흐름 모두 시간 이동이면 한 스텝은 2h
        spec = SplittingSpec.strang(lambda x, t: x + t, lambda x, t: x)
        assert step_splitting(spec, np.zeros(1), 0.3) == pytest.approx([0.6])

    def test_trivial_second_flow_is_double_first_flow(self):
        flow1 = free_spin_flow()
        spec = SplittingSpec.strang(flow1, lambda x, t: np.array(x, dtype=float))
        x0 = splitting_setup().initial_state
        assert step_splitting(spec, x0, 0.5) == pytest.approx(flow1(flow1(x0, 0.5), 0.5), abs=1e-14)

    def test_free_spin_legs_conserve_energy(self):
        setup = splitting_setup()
        sys = momentum_system()
        before = setup.initial_state
        for which, _, after in splitting_substeps(setup.spec, setup.initial_state, 0.5):
            dH = sys.energy(after) - sys.energy(before)
            if which == 1:
                assert abs(dH) <= 1e-14
            else:
                assert dH <= 1e-15
            before = after

    def test_free_spin_conserves_energy_over_long_run(self):
        # S2 가 항등이면 축별 정확 회전만 남음
        spec = SplittingSpec.strang(free_spin_flow(), lambda x, t: np.array(x, dtype=float))
        traj = integrate_splitting(spec, momentum_system(), ControlLaw.zero(), splitting_setup().initial_state, 1000, 0.5)
        assert len(traj) == 1000
        assert np.max(np.abs(traj.energies - traj.initial_energy)) <= 1e-12

    def test_damping_flow_is_exponential(self):
        flow = damping_flow((3.0, 4.0, 5.0), (1.0, 2.0, 3.0))
        x = flow(np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]), 0.5)
        assert x[:3] == pytest.approx(np.exp(-0.5 * np.array([3.0, 2.0, 5.0 / 3.0])))
        assert x[3:] == pytest.approx([1.0, 0.0, 0.0, 0.0])

    def test_rigid_body_lyapunov(self):
        setup = splitting_setup()
        traj = integrate_splitting(setup.spec, setup.system, setup.law, setup.initial_state, 1000, 0.5)
        assert traj.step_size == 1.0
        report = lyapunov_decrease(traj, setup.law)
        assert report.threshold == pytest.approx(1e-12)
        assert report.violations == 0
        assert traj.energies[-1] < traj.energies[0]

    def test_splitting_ledger_closes(self):
        setup = splitting_setup()
        traj = integrate_splitting(setup.spec, setup.system, setup.law, setup.initial_state, 50, 0.5)
        assert build_ledger(traj).max_residual <= 1e-13


class TestReferenceMethods:
    """비교용 고전 방법"""

    def test_improved_euler_one_step(self):
        sys = pendulum_system()
        cfg = StepperConfig(step_size=0.1)
        x0 = np.array([0.3, 0.2])
        x1 = step_reference("improved-euler", sys, ControlLaw.zero(), x0, cfg)
        k1 = np.array([x0[1], -np.sin(x0[0])])
        xp = x0 + 0.1 * k1
        k2 = np.array([xp[1], -np.sin(xp[0])])
        assert x1 == pytest.approx(x0 + 0.05 * (k1 + k2), abs=1e-15)

    def test_plain_avf_matches_avfphs_for_linear_output_feedback(self):
        sys = random_linear_system(n=4, m=2, seed=1)
        law = ControlLaw.output_feedback(lambda y: 0.3 * y)
        cfg = StepperConfig(step_size=0.05, solver_tolerance=1e-14, solver_kind="newton-numeric-jacobian")
        x0 = np.array([0.5, 1.0, -1.0, 0.2])
        x_plain = step_reference("plain-avf", sys, law, x0, cfg)
        x_avf, _ = step_avfphs(sys, law, x0, cfg)
        assert x_plain == pytest.approx(x_avf, abs=1e-12)

    def test_reference_records_have_stages(self, pendulum):
        traj = integrate_method("implicit-midpoint", pendulum.system, pendulum.law, pendulum.initial_state, 5, _cfg(pendulum))
        assert all(r.has_stages for r in traj.records)
        assert traj.method_name == "implicit-midpoint"

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            make_stepper("rk4")


class TestIntegrate:
    """궤적 적분"""

    def test_record_times_and_indices(self, pendulum):
        traj = integrate_method("avfphs", pendulum.system, pendulum.law, pendulum.initial_state, 4, _cfg(pendulum))
        assert [r.index for r in traj.records] == [1, 2, 3, 4]
        assert traj.times == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
        assert traj.initial_state == pytest.approx(pendulum.initial_state)

    def test_non_positive_step_count(self, pendulum):
        with pytest.raises(ContractViolation):
            integrate_method("avfphs", pendulum.system, pendulum.law, pendulum.initial_state, 0, _cfg(pendulum))

    def test_failure_carries_partial_trajectory(self, pendulum):
        cfg = _cfg(pendulum, solver_tolerance=1e-15, max_iterations=1)
        with pytest.raises(StepFailure) as excinfo:
            integrate_method("avfphs", pendulum.system, pendulum.law, pendulum.initial_state, 10, cfg)
        err = excinfo.value
        assert err.step_index == 1
        assert len(err.trajectory) == 0
        assert err.residual_norm > 0.0
