"""
PHS Lab Tests — conftest

프로젝트 루트를 sys.path에 추가하여 core.phs 등을 import 가능하게 합니다.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from core.experiments import build_experiment  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pendulum():
    return build_experiment("pendulum")


@pytest.fixture
def rigid_body():
    return build_experiment("rigid-body")


@pytest.fixture
def microphone():
    return build_experiment("microphone")
