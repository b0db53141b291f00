"""Backend agreement: the compiled extension must match the numpy
fallback bit-for-bit."""

import numpy as np
import pytest

from varioscreen import kernels

needs_compiled = pytest.mark.skipif(
    kernels._fastpath is None, reason="compiled extension not built")


def random_inputs(seed, k):
    rng = np.random.Generator(np.random.Philox(key=seed))
    fixed = rng.uniform(-50.0, 50.0, (k, 3))
    disp = rng.normal(0.0, 3.0, (k, 3))
    return fixed, disp


@needs_compiled
@pytest.mark.parametrize("k", [2, 3, 17, 64, 200])
def test_pairwise_cloud_backends_identical(k):
    fixed, disp = random_inputs(k, k)
    i1, j1, h1, e1 = kernels.pairwise_cloud_numpy(fixed, disp)
    i2, j2, h2, e2 = kernels._fastpath.pairwise_cloud(fixed, disp)
    assert np.array_equal(i1, i2)
    assert np.array_equal(j1, j2)
    assert np.array_equal(h1, h2)  # bitwise, no tolerance
    assert np.array_equal(e1, e2)


@needs_compiled
@pytest.mark.parametrize("k", [2, 5, 33, 150])
def test_nn_distances_backends_identical(k):
    fixed, _ = random_inputs(1000 + k, k)
    a = kernels.nn_distances_numpy(fixed)
    b = kernels._fastpath.nn_distances(fixed)
    assert np.array_equal(a, b)


def test_pair_order_row_major():
    fixed, disp = random_inputs(5, 6)
    i, j, _, _ = kernels.pairwise_cloud(fixed, disp)
    expected = [(a, b) for a in range(6) for b in range(a + 1, 6)]
    assert list(zip(i.tolist(), j.tolist())) == expected


def test_nn_matches_direct_scan():
    fixed, _ = random_inputs(9, 12)
    nn = kernels.nn_distances(fixed)
    for a in range(12):
        dists = [
            float(np.sqrt(((fixed[a] - fixed[b]) ** 2).sum()))
            for b in range(12) if b != a
        ]
        assert nn[a] == pytest.approx(min(dists), rel=1e-12)


def test_active_backend_reports():
    assert kernels.active_backend() in ("compiled", "numpy")
