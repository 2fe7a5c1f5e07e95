"""Backend equivalence: the jitted kernels must match the numpy twins."""

import os
import subprocess
import sys

import numpy as np
import pytest

from aftn_noma import _kernels


def test_backend_reported():
    assert _kernels.backend() in ("numba", "numpy")


def test_corr_quad_dispatch_matches_numpy_twin():
    rng = np.random.default_rng(0)
    x = rng.uniform(-50, 50, 300)
    freqs = np.linspace(0.0, 0.65, 513)
    sw = rng.uniform(0, 1, freqs.shape[0])
    got = _kernels.corr_quad_batch(x, freqs, sw)
    want = _kernels._corr_quad_batch_np(x, freqs, sw)
    assert np.abs(got - want).max() < 1e-12


def test_cubic_interp_dispatch_matches_numpy_twin():
    rng = np.random.default_rng(1)
    h = 0.01
    table = np.sin(np.arange(-3, 500) * h)
    x = rng.uniform(0.0, 4.5, 400)
    got = _kernels.cubic_interp_batch(table, -3 * h, 1.0 / h, x)
    want = _kernels._cubic_interp_batch_np(table, -3 * h, 1.0 / h, x)
    assert np.abs(got - want).max() < 1e-14


def test_cubic_interp_accuracy():
    h = 1.0 / 512
    xs = np.arange(-3, 2000) * h
    table = np.cos(3.0 * xs)
    rng = np.random.default_rng(2)
    x = rng.uniform(0.0, 3.5, 500)
    got = _kernels.cubic_interp_batch(table, xs[0], 1.0 / h, x)
    assert np.abs(got - np.cos(3.0 * x)).max() < 1e-9


def test_interp_exact_on_nodes():
    h = 0.125
    xs = np.arange(-3, 50) * h
    table = xs**3 - 2 * xs  # cubic: the 4-point stencil reproduces it exactly
    x = np.linspace(0.0, 5.0, 101)
    got = _kernels.cubic_interp_batch(table, xs[0], 1.0 / h, x)
    assert np.abs(got - (x**3 - 2 * x)).max() < 1e-11


def test_env_flag_selects_numpy_backend():
    code = "import aftn_noma; print(aftn_noma.backend())"
    env = dict(os.environ, AFTN_NOMA_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_bogus_backend_rejected():
    code = "import aftn_noma"
    env = dict(os.environ, AFTN_NOMA_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode != 0


@pytest.mark.skipif(_kernels.backend() != "numba", reason="numba not active")
def test_numpy_path_reproduces_numba_correlations():
    code = (
        "import numpy as np\n"
        "from aftn_noma import CorrTable, PulseParams\n"
        "t = CorrTable(PulseParams(0.3), 20.0)\n"
        "x = np.linspace(0, 19, 777)\n"
        "np.save('/tmp/aftn_corr_check.npy', t(x))\n"
    )
    env = dict(os.environ, AFTN_NOMA_BACKEND="numpy")
    subprocess.run([sys.executable, "-c", code], env=env, check=True)
    from aftn_noma import CorrTable, PulseParams

    t = CorrTable(PulseParams(0.3), 20.0)
    x = np.linspace(0, 19, 777)
    other = np.load("/tmp/aftn_corr_check.npy")
    assert np.abs(t(x) - other).max() < 1e-12
