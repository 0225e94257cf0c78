"""The compiled and numpy kernels must agree; skipped when only one is built."""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ntoslab import kernels

needs_both = pytest.mark.skipif(
    kernels.available_backends() != ["cython", "python"], reason="compiled kernels not built"
)


@pytest.fixture
def restore_backend():
    name = kernels.BACKEND
    yield
    kernels.use_backend(name)


def _run(name, fn):
    kernels.use_backend(name)
    return fn()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@needs_both
def test_winding_grid_backends_agree(restore_backend):
    axis = np.linspace(-4, 4, 41)
    job = lambda: kernels.winding_grid(axis, axis, 1.0, 256)
    wc, sc = _run("cython", job)
    wp, sp = _run("python", job)
    assert_array_equal(sc, sp)
    ok = sc == kernels.STATUS_OK
    assert_array_equal(wc[ok], wp[ok])


@needs_both
def test_charpoly_backends_agree(restore_backend):
    energies = np.linspace(-1.0, 1.0, 101)
    job = lambda: kernels.charpoly_real(2.5, 2.8, 1.0, 1e-5, 1e-5, 30, energies)
    assert_allclose(_run("cython", job), _run("python", job), rtol=1e-10, atol=0)


@needs_both
def test_log_delta_backends_agree(restore_backend):
    n_axis = np.arange(2.0, 60.0, 0.5)
    e_axis = np.linspace(-0.3, 0.3, 61)
    for modulus in (False, True):
        job = lambda: kernels.log_delta_grid(2.5, 2.8, 1.0, 1e-5, n_axis, e_axis, modulus)
        assert_allclose(_run("cython", job), _run("python", job), rtol=1e-10, equal_nan=True)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_single_winding(backend, restore_backend):
    kernels.use_backend(backend)
    assert kernels.winding_number(2.5, 2.8, 1.0) == 1
    assert kernels.winding_number(2.8, 1.5, 1.0) == 0


def test_fallback_when_extension_missing():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['ntoslab.kernels._ckernels'] = None\n"
        "from ntoslab import kernels\n"
        "print(kernels.BACKEND, kernels.available_backends())\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    assert out.split()[0] == "python"
