import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lazyier import kernels
from lazyier._pykernels import _mix, edge_keys

needs_cython = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")


def _splitmix_reference(state):
    """Scalar SplitMix64 output function on Python ints."""
    mask = (1 << 64) - 1
    z = state & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@pytest.mark.parametrize("x", [0, 1, 12345, 2**63, 2**64 - 1])
def test_mix_matches_scalar_reference(x):
    assert int(_mix(np.array([x], dtype=np.uint64))[0]) == _splitmix_reference(x)


def test_edge_keys_distinct():
    rows, cols = np.triu_indices(60)
    keys = edge_keys(7, rows, cols)
    assert np.unique(keys).size == keys.size


@needs_cython
@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    alpha=st.floats(0.0, 0.99),
    T=st.integers(1, 25),
    data=st.data(),
)
def test_backends_bit_identical(seed, alpha, T, data):
    m = data.draw(st.integers(0, 40))
    tau = data.draw(st.integers(0, T))
    rng = np.random.default_rng(seed % 2**32)
    rows = rng.integers(0, 50, m)
    cols = rows + rng.integers(0, 50, m)
    p, q = rng.random(m), rng.random(m)
    a = kernels.edge_chain(seed, rows, cols, p, q, alpha, T, tau, backend="cython")
    b = kernels.edge_chain(seed, rows, cols, p, q, alpha, T, tau, backend="numpy")
    assert a.dtype == b.dtype == np.uint8
    assert a.shape == (T, m)
    np.testing.assert_array_equal(a, b)


def test_output_independent_of_batching(backend):
    rows, cols = np.triu_indices(30)
    p = np.full(rows.size, 0.3)
    full = kernels.edge_chain(5, rows, cols, p, p, 0.6, 12, 12, backend=backend)
    half = rows.size // 2
    left = kernels.edge_chain(5, rows[:half], cols[:half], p[:half], p[:half], 0.6, 12, 12, backend=backend)
    right = kernels.edge_chain(5, rows[half:], cols[half:], p[half:], p[half:], 0.6, 12, 12, backend=backend)
    np.testing.assert_array_equal(full, np.hstack([left, right]))


def test_degenerate_probabilities(backend):
    rows = cols = np.arange(5)
    ones = kernels.edge_chain(1, rows, cols, np.ones(5), np.ones(5), 0.5, 6, 6, backend=backend)
    zeros = kernels.edge_chain(1, rows, cols, np.zeros(5), np.zeros(5), 0.5, 6, 6, backend=backend)
    assert ones.all() and not zeros.any()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.edge_chain(0, [0], [0], [0.5], [0.5], 0.0, 2, 2, backend="fortran")


def test_env_var_forces_numpy():
    env = dict(os.environ, LAZYIER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from lazyier import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
