"""The compiled and pure-Python Viterbi kernels must agree bit for bit."""

import importlib

import numpy as np
import pytest

from scribeforge import _backend
from scribeforge._viterbi_py import viterbi_fill as fill_py

try:
    from scribeforge._viterbi_c import viterbi_fill as fill_c
except ImportError:
    fill_c = None

from test_ctc_align import dyadic_row


def random_kernel_inputs(rng, n, s):
    rows = np.vstack([dyadic_row(rng, s) for _ in range(n)])
    val = np.zeros((n, s))
    np.log2(rows, out=val, where=rows > 0.0)
    floored = (rows == 0.0).astype(np.uint8)
    skip = (rng.random(s) < 0.5).astype(np.uint8)
    skip[:2] = 0
    return np.ascontiguousarray(val), floored, skip


@pytest.mark.skipif(fill_c is None, reason="compiled kernel not built")
def test_kernels_bit_identical():
    rng = np.random.default_rng(31337)
    for _ in range(300):
        n = int(rng.integers(1, 40))
        s = int(rng.integers(1, 15))
        val, floored, skip = random_kernel_inputs(rng, n, s)
        bp_a = np.empty((n, s), dtype=np.int8)
        bp_b = np.empty((n, s), dtype=np.int8)
        cnt_a, fin_a = fill_py(val, floored, skip, bp_a)
        cnt_b, fin_b = fill_c(val, floored, skip, bp_b)
        assert np.array_equal(cnt_a, cnt_b)
        assert np.array_equal(fin_a, fin_b)
        assert np.array_equal(bp_a, bp_b)


def test_backend_reports_selection():
    assert _backend.KERNEL_BACKEND in ("cython", "python")
    if fill_c is not None:
        assert _backend.KERNEL_BACKEND == "cython"


def test_fallback_import_path(monkeypatch):
    # simulate an install without the extension: the package must still import
    import builtins

    real_import = builtins.__import__

    def no_ext(name, *args, **kwargs):
        if "_viterbi_c" in name:
            raise ImportError("blocked for test")
        return real_import(name, *args, **kwargs)

    monkeypatch.setattr(builtins, "__import__", no_ext)
    mod = importlib.reload(_backend)
    try:
        assert mod.KERNEL_BACKEND == "python"
    finally:
        monkeypatch.undo()
        importlib.reload(_backend)
