import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from pnormcut._kernels import _numpy
from pnormcut.graph import random_connected_graph

_numba = pytest.importorskip("pnormcut._kernels._numba")


def _masks_signs(n):
    masks = np.arange(1 << (n - 1))
    signs = np.ones((masks.size, n))
    for j in range(1, n):
        signs[(masks >> (j - 1)) & 1 == 1, j] = -1
    return signs


@given(st.integers(2, 12), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_cut_values_parity_and_reference(n, seed, density):
    g = random_connected_graph(n, np.random.default_rng(seed), density)
    eu, ev = g.edge_arrays()
    a = _numpy.cut_values(n, eu, ev)
    b = _numba.cut_values(n, eu, ev)
    assert np.array_equal(a, b)
    signs = _masks_signs(n)
    ref = (signs[:, eu] != signs[:, ev]).sum(axis=1)
    assert np.array_equal(a, ref)


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 10)),
                  elements=st.floats(-2, 2, allow_nan=False)),
       st.sampled_from([1.0, 1.5, 2.0, 2.5, 3.0]))
def test_sign_power_sums_parity(m, p):
    a = _numpy.sign_power_sums(m, p)
    b = _numba.sign_power_sums(np.ascontiguousarray(m), p)
    ref = (np.abs(_masks_signs(m.shape[1]) @ m.T) ** p).sum(axis=1)
    scale = max(1.0, float(ref.max()))
    assert np.max(np.abs(a - ref)) <= 1e-12 * scale
    assert np.max(np.abs(b - ref)) <= 1e-12 * scale


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 2.5, 3.0, 4.0]))
def test_ascent_parity(seed, p):
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1, 1, (int(rng.integers(1, 6)), int(rng.integers(1, 6))))
    x0 = rng.standard_normal((m.shape[1], 8))
    xa, va, ia, ca, wa = _numpy.ascent_batch(m, x0, p, 1e-12, 500, 3)
    xb, vb, ib, cb, wb = _numba.ascent_batch(m, x0, p, 1e-12, 500, 3)
    assert np.allclose(va, vb, rtol=1e-9, atol=1e-12)
    assert (wa <= 1e-12).all() and (wb <= 1e-12).all()
    # Each run's value is the objective at its returned iterate.
    for vals, xs in ((va, xa), (vb, xb)):
        for r in range(x0.shape[1]):
            x = xs[:, r]
            if np.any(x):
                obj = np.sum(np.abs(m @ x) ** p) ** (1 / p) / np.sum(np.abs(x) ** p) ** (1 / p)
                assert vals[r] == pytest.approx(obj, rel=1e-9)


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(2, 9)),
                  elements=st.floats(-3, 3, allow_nan=False)),
       st.sampled_from([2.0, 2.5, 3.0, 4.0]))
def test_gadget_values_parity(y, p):
    a = _numpy.gadget_values(y, p)
    b = _numba.gadget_values(np.ascontiguousarray(y), p)
    nxt = np.roll(y, -1, axis=1)
    ref = (np.abs(y - nxt) ** p + np.abs(y + nxt) ** p).sum(axis=1)
    assert np.allclose(a, ref, rtol=1e-12) and np.allclose(b, ref, rtol=1e-12)


def _backend_in_subprocess(value):
    env = dict(os.environ, PNORMCUT_BACKEND=value)
    return subprocess.run([sys.executable, "-c", "import pnormcut; print(pnormcut.BACKEND)"],
                          env=env, capture_output=True, text=True)


def test_backend_flag():
    assert _backend_in_subprocess("numpy").stdout.strip() == "numpy"
    assert _backend_in_subprocess("numba").stdout.strip() == "numba"
    bad = _backend_in_subprocess("fortran")
    assert bad.returncode != 0 and "PNORMCUT_BACKEND" in bad.stderr
