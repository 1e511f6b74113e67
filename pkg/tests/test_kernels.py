import numpy as np
import pytest

from rankcorr import _kernels_py, kernels

BACKENDS = kernels.available_backends()


def test_python_backend_always_present():
    assert "python" in BACKENDS
    assert kernels.active_backend() in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_backends_agree(backend, rng):
    for n in (2, 3, 17, 64, 65, 500, 4096):
        r = rng.permutation(n) + 1
        ref_t = _kernels_py.weighted_t_naive(r.tolist()) if n <= 500 else _kernels_py.weighted_t(r)
        assert kernels.weighted_t(r, backend) == ref_t
        assert kernels.concordant_count(r, backend) == _kernels_py.concordant_count(r)
        if n <= 500:
            assert kernels.weighted_t_naive(r, backend) == ref_t
            assert kernels.concordant_count_naive(r, backend) == kernels.concordant_count(r, backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_read_only_input(backend):
    r = np.array([2, 1, 3], dtype=np.int64)
    r.flags.writeable = False
    assert kernels.weighted_t(r, backend) == 3
    assert kernels.concordant_count(r, backend) == 2


def test_using_backend_restores():
    before = kernels.active_backend()
    with kernels.using_backend("python"):
        assert kernels.active_backend() == "python"
    assert kernels.active_backend() == before
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
def test_overflow_falls_back_to_python(monkeypatch):
    from rankcorr import _kernels

    monkeypatch.setattr(_kernels, "MAX_N", 3)
    r = np.arange(1, 6)
    with pytest.raises(OverflowError):
        _kernels.weighted_t(r)
    assert kernels.weighted_t(r, "compiled") == 5 * 4 * 9 // 6


def test_import_without_extension_selects_python():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['rankcorr._kernels'] = None\n"
        "from rankcorr import kernels, rankstats\n"
        "assert kernels.active_backend() == 'python', kernels.active_backend()\n"
        "assert kernels.available_backends() == ['python']\n"
        "print(rankstats.weighted_T([1, 3, 2]))\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "3"
