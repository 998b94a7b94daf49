"""
PHS Lab v1.0 — 번들 실험 테스트

강체, 진자, 축전기 마이크, 선형 시스템, custom 실험 로더.

실행:
    python -m pytest tests/test_experiments.py -v
"""

import numpy as np
import pytest

from core.experiments import EXPERIMENT_NAMES, Experiment, build_experiment
from core.experiments.linear import harmonic_oscillator, random_linear_system
from core.experiments.microphone import microphone_system
from core.experiments.pendulum import pendulum_system, rotation_count
from core.experiments.rigid_body import axis_rotation, hat, momentum_system, quaternion_norm, rigid_body_system
from core.phs.exceptions import ConfigurationError
from core.phs.system import ControlMode, validate_system


class TestRegistry:
    """실험 레지스트리"""

    def test_names(self):
        assert EXPERIMENT_NAMES == ("rigid-body", "pendulum", "microphone", "custom")

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            build_experiment("double-pendulum")

    def test_pendulum_defaults(self, pendulum):
        assert pendulum.initial_state == pytest.approx([2.8, 1.4])
        assert pendulum.step_size == 0.5
        assert pendulum.steps == 200
        assert pendulum.solver_kind == "fixed-point"

    def test_rigid_body_defaults(self, rigid_body):
        assert rigid_body.initial_state == pytest.approx([1.0, -0.5, 0.8, 0.5, 0.5, 0.5, 0.5])
        assert rigid_body.law.mode is ControlMode.STATE_FEEDBACK
        assert rigid_body.splitting is not None
        assert rigid_body.diagnostics(rigid_body.initial_state) == {"q_norm": pytest.approx(1.0)}

    def test_microphone_overrides(self):
        exp = build_experiment("microphone", {"R": 50.0, "steps": 10, "initial_state": [1.0, 0.0, 0.5]})
        assert exp.steps == 10
        assert exp.initial_state == pytest.approx([1.0, 0.0, 0.5])
        B = exp.system.structure_at(exp.initial_state)
        assert B[2, 2] == pytest.approx(-1.0 / 50.0)

    def test_custom_requires_target(self):
        with pytest.raises(ConfigurationError):
            build_experiment("custom", {})

    def test_custom_bad_module(self):
        with pytest.raises(ConfigurationError):
            build_experiment("custom", {"system": "core.nowhere:factory"})

    def test_custom_factory(self):
        exp = build_experiment("custom", {"system": "core.experiments:damped_oscillator_experiment", "gain": 0.2})
        assert isinstance(exp, Experiment)
        assert exp.system.name == "oscillator"
        assert exp.law.evaluate(np.array([1.0]), np.zeros(2), 0.0, 1) == pytest.approx([-0.2])


class TestPendulum:
    """제어 진자"""

    def test_energy_at_rest(self):
        assert pendulum_system().energy(np.zeros(2)) == 0.0

    @pytest.mark.parametrize("q,count", [(0.1, 0), (2.0 * np.pi + 0.2, 1), (-4.0 * np.pi, -2), (3.0 * np.pi - 0.1, 1)])
    def test_rotation_count(self, q, count):
        assert rotation_count(q) == count


class TestMicrophone:
    """축전기 마이크"""

    def test_closed_form_avf_on_diagonal(self, rng):
        sys = microphone_system()
        for _ in range(10):
            x = rng.normal(size=3)
            assert sys.averaged_gradient(x, x) == pytest.approx(sys.gradient(x), abs=1e-14)

    def test_equilibrium_gradient(self):
        sys = microphone_system()
        assert sys.gradient(np.array([3.0, 0.0, 0.0])) == pytest.approx(np.zeros(3))


class TestRigidBody:
    """제어 강체"""

    def test_hat_is_cross_product(self, rng):
        w, v = rng.normal(size=3), rng.normal(size=3)
        assert hat(w) @ v == pytest.approx(np.cross(w, v))

    def test_mass_matrix(self):
        sys = rigid_body_system()
        assert np.diag(sys.mass_matrix) == pytest.approx([1.0, 2.0, 3.0, 1.0, 1.0, 1.0, 1.0])

    def test_momentum_coordinates_skew(self, rng):
        report = validate_system(momentum_system(), [rng.normal(size=7) for _ in range(4)])
        assert report.is_skew
        assert report.gradient_consistent

    def test_axis_rotation_preserves_energy_and_norm(self, rng):
        sys = momentum_system()
        for k in range(3):
            x = rng.normal(size=7)
            y = axis_rotation(x, k, 0.7, (1.0, 2.0, 3.0))
            assert sys.energy(y) == pytest.approx(sys.energy(x), abs=1e-14)
            assert quaternion_norm(y) == pytest.approx(quaternion_norm(x), abs=1e-14)
            assert y[k] == x[k]


class TestLinear:
    """선형 테스트 시스템"""

    def test_random_system_is_deterministic(self):
        a, b = random_linear_system(seed=5), random_linear_system(seed=5)
        x = np.ones(4)
        assert a.structure_at(x) == pytest.approx(b.structure_at(x))

    def test_uncoupled_oscillator_has_zero_output(self):
        sys = harmonic_oscillator(coupled=False)
        assert sys.input_matrix_at(np.ones(2)) == pytest.approx(np.zeros((2, 1)))
