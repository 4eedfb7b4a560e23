import numpy as np
import pytest
import scipy.sparse as sp

from pipea.errors import DomainError, ParameterError
from pipea.linalg import (
    hadamard,
    randomized_svd,
    row_col_normalize,
    row_topk_l2_normalize,
    spmm,
    threshold_sparsify_log,
)
from support import naive_matmul


# --- spmm ---------------------------------------------------------------


def test_spmm_identity():
    dense = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(spmm(sp.identity(2, format="csr"), dense), dense)


def test_spmm_hand_example():
    a = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    b = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(spmm(a, b), [[3.0, 4.0], [1.0, 2.0]])


def test_spmm_empty_rows():
    a = sp.csr_matrix((0, 3))
    out = spmm(a, np.ones((3, 2)))
    assert out.shape == (0, 2)


def test_spmm_dimension_mismatch():
    with pytest.raises(ParameterError):
        spmm(sp.identity(2, format="csr"), np.ones((3, 1)))


@pytest.mark.parametrize("seed", range(3))
def test_spmm_matches_naive_product(seed):
    rng = np.random.default_rng(seed)
    a = sp.random(50, 50, density=0.2, random_state=seed, format="csr")
    b = rng.standard_normal((50, 50))
    got = spmm(a, b)
    want = naive_matmul(a.toarray(), b)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


# --- row_topk_l2_normalize ------------------------------------------------


def test_topk_keeps_and_normalizes():
    out = row_topk_l2_normalize(np.array([[0.5, 0.3, 0.2]]), k=2).toarray()
    norm = np.sqrt(0.5**2 + 0.3**2)
    assert np.allclose(out, [[0.5 / norm, 0.3 / norm, 0.0]])
    assert abs(out[0, 0] - 0.8575) < 5e-5 and abs(out[0, 1] - 0.5145) < 5e-5


def test_topk_pinned_row_is_one_hot():
    out = row_topk_l2_normalize(
        np.array([[0.9, 0.8, 0.1]]), k=2, pinned_rows={0: 2}
    ).toarray()
    assert np.array_equal(out, [[0.0, 0.0, 1.0]])


def test_topk_zero_row_stays_zero():
    out = row_topk_l2_normalize(np.zeros((2, 3)), k=2)
    assert out.nnz == 0


def test_topk_ties_toward_smaller_column():
    out = row_topk_l2_normalize(np.array([[0.5, 0.5, 0.1]]), k=1).toarray()
    assert np.array_equal(out, [[1.0, 0.0, 0.0]])


def test_topk_invalid_args():
    with pytest.raises(ParameterError):
        row_topk_l2_normalize(np.ones((2, 2)), k=0)
    with pytest.raises(ParameterError):
        row_topk_l2_normalize(np.ones((2, 2)), k=1, pinned_rows={0: 5})


@pytest.mark.parametrize("seed", range(3))
def test_topk_rows_unit_norm_and_sparse(seed):
    rng = np.random.default_rng(seed)
    m = rng.random((20, 15))
    k = 3
    out = row_topk_l2_normalize(m, k=k, pinned_rows={2: 7})
    dense = out.toarray()
    for i in range(20):
        nnz = np.count_nonzero(dense[i])
        assert nnz <= k
        if i == 2:
            assert dense[i, 7] == 1.0 and nnz == 1
        elif nnz:
            assert abs(np.linalg.norm(dense[i]) - 1.0) < 1e-12


# --- hadamard -------------------------------------------------------------


def test_hadamard_examples():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[2.0, 0.0], [1.0, 1.0]])
    assert np.array_equal(hadamard(a, b), [[2.0, 0.0], [3.0, 4.0]])
    assert np.array_equal(hadamard(a, np.ones_like(a)), a)
    assert np.array_equal(hadamard(a, np.zeros_like(a)), np.zeros_like(a))


def test_hadamard_shape_mismatch():
    with pytest.raises(ParameterError):
        hadamard(np.ones((2, 2)), np.ones((2, 3)))


# --- threshold_sparsify_log -----------------------------------------------


def test_threshold_drops_and_logs():
    s = np.array([[0.05, 0.2], [0.1, 0.0]])
    out = threshold_sparsify_log(s, delta=0.1)
    dense = out.toarray()
    assert dense[0, 0] == 0.0  # below threshold
    assert abs(dense[0, 1] - np.log(2.0)) < 1e-12
    assert dense[1, 0] == 0.0  # exactly delta is dropped
    assert out.nnz == 1


def test_threshold_negative_entry_rejected():
    with pytest.raises(DomainError):
        threshold_sparsify_log(np.array([[-0.1, 0.2]]), delta=0.1)
    with pytest.raises(ParameterError):
        threshold_sparsify_log(np.ones((1, 1)), delta=0.0)


def test_threshold_sparse_input():
    s = sp.csr_matrix(np.array([[0.05, 0.2], [0.0, 0.3]]))
    out = threshold_sparsify_log(s, delta=0.1)
    assert np.allclose(out.toarray(), [[0.0, np.log(2.0)], [0.0, np.log(3.0)]])


@pytest.mark.parametrize("seed", range(3))
def test_threshold_stores_only_positive(seed):
    rng = np.random.default_rng(seed)
    out = threshold_sparsify_log(rng.random((30, 30)), delta=0.5)
    assert out.nnz > 0
    assert np.all(out.data > 0)


# --- randomized_svd ---------------------------------------------------------


def test_svd_diagonal():
    s = sp.diags([3.0, 2.0, 1.0]).tocsr()
    _, sigma, _ = randomized_svd(s, d=2, rng_seed=0)
    assert np.allclose(sigma, [3.0, 2.0], atol=1e-6)


def test_svd_all_ones():
    s = sp.csr_matrix(np.ones((2, 2)))
    u, sigma, v = randomized_svd(s, d=1, rng_seed=0)
    assert abs(sigma[0] - 2.0) < 1e-6
    assert u.shape == (2, 1) and v.shape == (2, 1)


def test_svd_full_rank_reconstruction():
    rng = np.random.default_rng(4)
    dense = rng.standard_normal((30, 30))
    s = sp.csr_matrix(dense)
    u, sigma, v = randomized_svd(s, d=30, rng_seed=1)
    approx = u @ np.diag(sigma) @ v.T
    rel = np.linalg.norm(approx - dense) / np.linalg.norm(dense)
    assert rel <= 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_svd_matches_exact_oracle(seed):
    rng = np.random.default_rng(seed)
    dense = rng.random((50, 50))
    s = sp.csr_matrix(dense)
    _, sigma, _ = randomized_svd(s, d=10, power_iters=2, rng_seed=seed)
    exact = np.linalg.svd(dense, compute_uv=False)[:10]
    assert np.all(np.abs(sigma - exact) <= 1e-3 * exact)


def test_svd_orthonormal_factors():
    rng = np.random.default_rng(9)
    s = sp.csr_matrix(rng.random((40, 25)))
    u, sigma, v = randomized_svd(s, d=8, rng_seed=2)
    assert np.allclose(u.T @ u, np.eye(8), atol=1e-6)
    assert np.allclose(v.T @ v, np.eye(8), atol=1e-6)
    assert np.all(np.diff(sigma) <= 1e-12)
    assert np.all(sigma >= 0)


def test_svd_deterministic():
    s = sp.random(20, 20, density=0.4, random_state=3, format="csr")
    run1 = randomized_svd(s, d=5, rng_seed=42)
    run2 = randomized_svd(s, d=5, rng_seed=42)
    for a, b in zip(run1, run2):
        assert np.array_equal(a, b)


def test_svd_rank_guard():
    with pytest.raises(ParameterError):
        randomized_svd(sp.identity(3, format="csr"), d=4)


# --- row_col_normalize ------------------------------------------------------


def test_row_col_normalize_uniform_and_diag():
    assert np.allclose(row_col_normalize(np.ones((2, 2))), 0.5 * np.ones((2, 2)))
    assert np.allclose(row_col_normalize(np.diag([2.0, 2.0])), np.eye(2))


def test_row_col_normalize_hand_example():
    out = row_col_normalize(np.array([[1.0, 3.0], [0.0, 1.0]]))
    assert np.allclose(out, [[1.0, 0.75 / 1.75], [0.0, 1.0 / 1.75]])
    assert abs(out[0, 1] - 0.4286) < 5e-5 and abs(out[1, 1] - 0.5714) < 5e-5


def test_row_col_normalize_zero_rows_cols_pass_through():
    out = row_col_normalize(np.array([[0.0, 0.0], [0.0, 2.0]]))
    assert np.allclose(out, [[0.0, 0.0], [0.0, 1.0]])


def test_row_col_normalize_rejects_negative():
    with pytest.raises(DomainError):
        row_col_normalize(np.array([[1.0, -1.0]]))
