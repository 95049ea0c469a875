"""The compiled and pure-numpy episode loops consume identical random streams."""
import os
import subprocess
import sys

import numpy as np
import pytest

from gauss_ts import HAS_NUMBA, Environment, PolicySpec, run_episode, run_replications
from gauss_ts.rng import RngStream

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="needs both backends")

CASES = [
    (Environment.from_params([0.0, -1.0], [1.0, 1.0]), PolicySpec.thompson(-0.5)),
    (Environment.from_params([0.0, -0.2, -1.0], [1.0, 4.0, 0.3]), PolicySpec.thompson(-0.1)),
    (Environment.from_params([0.0, -0.5], [1.0, 1.0]), PolicySpec.thompson(0.5, {1: -0.5})),
    (Environment.from_params([0.0, -1.0, -1.0], [1.0, 1.0, 1.0]), PolicySpec.thompson(-1.0, {1: 0.0, 2: 0.0})),
]


@pytest.mark.parametrize("env,spec", CASES)
def test_replications_match(env, spec):
    a = run_replications(env, spec, 3000, 12, base_seed=11, backend="numba")
    b = run_replications(env, spec, 3000, 12, base_seed=11, backend="numpy")
    np.testing.assert_array_equal(a.pulls, b.pulls)
    np.testing.assert_array_equal(a.regret, b.regret)


@pytest.mark.parametrize("env,spec", CASES[:2])
def test_episode_traces_match(env, spec):
    a = run_episode(env, spec, 1500, RngStream(2, 5), backend="numba")
    b = run_episode(env, spec, 1500, RngStream(2, 5), backend="numpy")
    np.testing.assert_array_equal(a.chosen, b.chosen)
    np.testing.assert_array_equal(a.cum_regret, b.cum_regret)


def test_env_flag_selects_numpy():
    code = "import gauss_ts; print(gauss_ts.HAS_NUMBA, gauss_ts.default_backend())"
    env = dict(os.environ, GAUSS_TS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "numpy"]


def test_numpy_only_process_reproduces_numba_result():
    code = (
        "from gauss_ts import Environment, PolicySpec, run_replications\n"
        "env = Environment.from_params([0.0, -1.0], [1.0, 1.0])\n"
        "r = run_replications(env, PolicySpec.thompson(-0.5), 800, 4, base_seed=3)\n"
        "print(repr(r.mean[-1]))\n"
    )
    env = dict(os.environ, GAUSS_TS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    ref = run_replications(Environment.from_params([0.0, -1.0], [1.0, 1.0]), PolicySpec.thompson(-0.5), 800, 4, base_seed=3)
    assert out.stdout.strip() == repr(ref.mean[-1])
