import numpy as np
import pytest

from smefilter.vectorize import rho_to_vec, vec_to_rho, trace_vector, vector_dim

from conftest import rand_herm


def test_layout_d2():
    rho = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
    x = rho_to_vec(rho)
    # slots: rho11, Re rho12, rho22, Im rho12
    assert np.allclose(x, [0.7, 0.1, 0.3, 0.2])


def test_diagonal_only_state():
    D = 5
    x = rho_to_vec(np.eye(D) / D)
    v = trace_vector(D)
    assert np.allclose(x[v > 0], 1.0 / D)
    assert np.all(x[v == 0] == 0.0)


@pytest.mark.parametrize("D", [2, 3, 6, 17, 120])
def test_round_trip_exact(D):
    rho = rand_herm(D, seed=D)
    assert np.abs(vec_to_rho(rho_to_vec(rho)) - rho).max() == 0.0


def test_round_trip_weighted():
    rho = rand_herm(8, seed=1)
    back = vec_to_rho(rho_to_vec(rho, weighted=True), weighted=True)
    assert np.abs(back - rho).max() < 1e-15


def test_vec_to_rho_zero_and_projector():
    assert np.all(vec_to_rho(np.zeros(16)) == 0)
    D = 4
    for n in range(1, D + 1):
        x = np.zeros(D * D)
        x[n * (n + 1) // 2 - 1] = 1.0
        rho = vec_to_rho(x)
        expect = np.zeros((D, D))
        expect[n - 1, n - 1] = 1.0
        assert np.array_equal(rho.real, expect)
        assert np.all(rho.imag == 0)


def test_vec_to_rho_hermitian_for_any_input():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.normal(size=16)
        rho = vec_to_rho(x)
        assert np.abs(rho - rho.conj().T).max() == 0.0


def test_trace_vector_d2_and_counts():
    assert np.array_equal(trace_vector(2), [1.0, 0.0, 1.0, 0.0])
    v = trace_vector(120)
    assert v.sum() == 120
    assert np.count_nonzero(v) == 120
    # v.v = D
    assert v @ v == 120


def test_trace_functional_matches_trace():
    for D in (3, 7, 30):
        rho = rand_herm(D, seed=D, trace_one=False)
        v = trace_vector(D)
        assert abs(v @ rho_to_vec(rho) - np.trace(rho).real) < 1e-12 * max(1, abs(np.trace(rho)))


def test_weighted_inner_product_is_trace_inner_product():
    A = rand_herm(9, seed=5, trace_one=False)
    B = rand_herm(9, seed=6, trace_one=False)
    xa = rho_to_vec(A, weighted=True)
    xb = rho_to_vec(B, weighted=True)
    tr = np.trace(A @ B).real
    assert abs(xa @ xb - tr) < 1e-12 * abs(tr)


def test_unweighted_inner_product_relation():
    # dot product undercounts each off-diagonal Re/Im product exactly once
    A = rand_herm(7, seed=8, trace_one=False)
    B = rand_herm(7, seed=9, trace_one=False)
    xa = rho_to_vec(A)
    xb = rho_to_vec(B)
    iu = np.triu_indices(7, k=1)
    missing = (A[iu].real * B[iu].real + A[iu].imag * B[iu].imag).sum()
    assert abs(xa @ xb - (np.trace(A @ B).real - missing)) < 1e-12


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        rho_to_vec(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian
    with pytest.raises(ValueError):
        rho_to_vec(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        vec_to_rho(np.zeros(5))  # not a perfect square
    with pytest.raises(ValueError):
        trace_vector(0)


def test_vector_dim():
    assert vector_dim(120) == 14400
