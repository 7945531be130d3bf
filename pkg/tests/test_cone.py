import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from adar import _fallback, kernels
from adar.cone import ConeSpec, check_pd, project_batch, project_cone
from adar.errors import MatrixError
from oracles import enumerate_projection


def random_pd(rng, d, cond=None):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    if cond is None:
        ev = rng.uniform(0.2, 5.0, d)
    else:
        ev = np.geomspace(1.0, cond, d)
    return (Q * ev) @ Q.T


def random_cone(rng, d, max_half=10):
    perm = rng.permutation(d)
    k = int(rng.integers(0, min(d, max_half) + 1))
    nz = int(rng.integers(0, d - k + 1))
    return ConeSpec.from_indices(d, perm[:k], perm[k : k + nz])


def test_identity_clamp():
    r = project_cone([1.0, -0.5], np.eye(2), ConeSpec.from_indices(2, [1]))
    assert_array_equal(r.lam, [1.0, 0.0])
    assert r.active_set == (1,)


def test_correlated_metric_example():
    r = project_cone([-1.0, 2.0], [[2.0, 1.0], [1.0, 2.0]], ConeSpec.from_indices(2, [0]))
    assert_allclose(r.lam, [0.0, 1.5], atol=1e-15)


def test_free_cone_is_identity(rng):
    J = random_pd(rng, 5)
    z = rng.standard_normal(5)
    assert_allclose(project_cone(z, J, ConeSpec.free(5)).lam, z, rtol=1e-13)


def test_zero_mask_exact(rng):
    J = random_pd(rng, 4)
    r = project_cone(rng.standard_normal(4), J, ConeSpec.from_indices(4, [0], [2, 3]))
    assert r.lam[2] == 0.0 and r.lam[3] == 0.0


def test_masks_disjoint():
    with pytest.raises(ValueError):
        ConeSpec.from_indices(3, [1], [1])


@pytest.mark.parametrize("J", [[[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.5], [0.0, 1.0]], np.zeros((2, 2))])
def test_bad_metric(J):
    with pytest.raises(MatrixError):
        project_cone([1.0, 1.0], J, ConeSpec.from_indices(2, [0]))


@pytest.mark.parametrize("seed", range(50))
def test_matches_enumeration_oracle(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 9))
    J = random_pd(rng, d)
    cone = random_cone(rng, d)
    z = rng.standard_normal(d) * 2
    r = project_cone(z, J, cone)
    lam, val = enumerate_projection(z, J, cone.halfline, cone.zero)
    assert_allclose(r.lam, lam, atol=1e-10)
    assert_allclose(r.objective, val, atol=1e-10)
    assert r.kkt_residual <= 1e-10 * max(1.0, np.abs(J).max() * np.abs(z).max())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1e2, 1e4, 1e6, 1e8]))
def test_feasible_and_idempotent_under_bad_conditioning(seed, cond):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 8))
    J = check_pd(random_pd(rng, d, cond))
    cone = random_cone(rng, d)
    r = project_cone(rng.standard_normal(d), J, cone)
    assert cone.contains(r.lam)
    again = project_cone(r.lam, J, cone)
    assert_allclose(again.lam, r.lam, atol=1e-8 * max(1.0, np.abs(r.lam).max()))


def test_batch_backends_agree(rng):
    d = 6
    J = random_pd(rng, d)
    cone = ConeSpec.from_indices(d, [2, 3, 4], [5])
    Z = rng.standard_normal((2000, d))
    ref = np.array([project_cone(z, J, cone).lam for z in Z[:200]])
    fast = project_batch(Z, J, cone)
    slow = _fallback.project_batch(Z, J, cone.halfline, cone.zero)
    assert_allclose(fast[:200], ref, atol=1e-12)
    assert_allclose(fast, slow, atol=1e-12)


def test_kernel_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
