import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adar.likelihood import QuasiLikelihood
from adar.model import ModelSpec, ParamVector, simulate
from adar.weights import WeightScheme, compute_weights

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def dgp1_frame():
    spec = ModelSpec(1, 2)
    theta = ParamVector(0.0, [0.5], 1.0, [0.1, 0.0])
    return spec, theta, simulate(spec, theta, n=2000, seed=11)


@pytest.fixture(scope="session")
def dgp1_lik(dgp1_frame):
    spec, theta, frame = dgp1_frame
    w = compute_weights(WeightScheme("hv"), frame)
    return QuasiLikelihood(frame, spec, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
