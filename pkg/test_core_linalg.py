"""
Tests for the dense linear algebra kernel and the samplers.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from core_linalg import (
    frobenius_inner,
    haar_unitary,
    householder_qr_reduced,
    orthonormal_complement,
    pinv_norms,
    batch_pinv_frobenius_sq,
    qr_solve,
    reference_eigendecomposition,
    sample_gaussian_batch,
    sample_gaussian_matrix,
    sample_sphere_matrix,
    sample_truncated_gaussian,
    svd,
    complex_gaussian,
)
from models import DimensionError, NumericalError, OracleError, RankError, RngHandle


def test_same_stream_same_draws():
    a = complex_gaussian(RngHandle(42, 3), 10)
    b = complex_gaussian(RngHandle(42, 3), 10)
    c = complex_gaussian(RngHandle(42, 4), 10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derived_streams_are_stable_and_distinct():
    parent = RngHandle(7)
    assert parent.derive(5) == RngHandle(7).derive(5)
    assert parent.derive(5).stream_id != parent.derive(6).stream_id


def test_rng_rejects_out_of_range_seed():
    with pytest.raises(ValueError):
        RngHandle(-1)
    with pytest.raises(ValueError):
        RngHandle(2 ** 64)


def test_complex_gaussian_variance():
    z = complex_gaussian(RngHandle(1), 40_000)
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.05
    assert abs(np.var(z.real) - 0.5) < 0.03


def test_gaussian_matrix_center_and_shape():
    center = np.diag([5.0, -5.0]).astype(complex)
    A = sample_gaussian_matrix(2, 2, center=center, sigma=1e-6, rng=RngHandle(3))
    assert_allclose(A, center, atol=1e-4)

    with pytest.raises(DimensionError):
        sample_gaussian_matrix(3, 3, center=center, rng=RngHandle(3))


def test_gaussian_batch_shape():
    stack = sample_gaussian_batch(5, 2, 3, RngHandle(9))
    assert stack.shape == (5, 2, 3)


def test_truncated_gaussian_respects_radius():
    rng = RngHandle(11)
    for _ in range(50):
        A, draws = sample_truncated_gaussian(3, 2.0, rng)
        assert np.linalg.norm(A) <= 2.0
        assert draws >= 1


def test_sphere_matrix_has_unit_norm():
    A = sample_sphere_matrix(4, RngHandle(5))
    assert abs(np.linalg.norm(A) - 1.0) < 1e-14


def test_frobenius_inner_conjugates_second_argument():
    A = np.array([[1j, 0], [0, 0]])
    B = np.array([[1, 0], [0, 0]], dtype=complex)
    assert frobenius_inner(A, B) == 1j
    assert frobenius_inner(B, A) == -1j


def test_householder_qr_factors_and_convention():
    M = sample_gaussian_matrix(5, 3, rng=RngHandle(17))
    Q, R = householder_qr_reduced(M)

    assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-13)
    assert_allclose(Q @ R, M, atol=1e-13)
    assert_allclose(np.tril(R, -1), 0.0, atol=0.0)

    first = M[:, 0]
    expected = -first[0] / abs(first[0]) * np.linalg.norm(first)
    assert_allclose(R[0, 0], expected, rtol=1e-13)


def test_householder_qr_rank_deficient():
    col = np.array([1.0, 2.0j, -1.0])
    M = np.column_stack([col, 2.0 * col])
    with pytest.raises(RankError):
        householder_qr_reduced(M)


def test_householder_qr_wide_matrix():
    with pytest.raises(DimensionError):
        householder_qr_reduced(np.ones((2, 3), dtype=complex))


def test_orthonormal_complement():
    v = complex_gaussian(RngHandle(23), 4)
    v /= np.linalg.norm(v)
    Q = orthonormal_complement(v)

    assert Q.shape == (4, 3)
    assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-13)
    assert_allclose(Q.conj().T @ v, 0.0, atol=1e-13)


def test_qr_solve():
    R = sample_gaussian_matrix(4, 4, rng=RngHandle(29))
    x = complex_gaussian(RngHandle(30), 4)
    assert_allclose(qr_solve(R, R @ x), x, atol=1e-10)


def test_haar_unitary_is_unitary():
    U = haar_unitary(5, RngHandle(31))
    assert_allclose(U.conj().T @ U, np.eye(5), atol=1e-13)


def test_haar_law_is_left_invariant():
    """|U_11|² and |(WU)_11|² follow the same law for a fixed unitary W."""
    n = 3
    W = haar_unitary(n, RngHandle(100))
    first = RngHandle(101)
    second = RngHandle(102)

    plain = [abs(haar_unitary(n, first)[0, 0]) ** 2 for _ in range(2000)]
    rotated = [abs((W @ haar_unitary(n, second))[0, 0]) ** 2 for _ in range(2000)]

    assert stats.ks_2samp(plain, rotated).pvalue > 0.01
    # |U_11|² is Beta(1, n−1), mean 1/n
    assert abs(np.mean(plain) - 1.0 / n) < 0.02


def test_pinv_norms_full_rank():
    M = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]], dtype=complex)
    op_norm, fro_norm = pinv_norms(M)
    assert_allclose(op_norm, 1.0)
    assert_allclose(fro_norm, math.sqrt(1.0 + 0.25))


def test_pinv_norms_with_expected_rank():
    M = np.diag([4.0, 2.0, 0.0]).astype(complex)
    assert pinv_norms(M) == (math.inf, math.inf)
    op_norm, fro_norm = pinv_norms(M, rank=2)
    assert_allclose(op_norm, 0.5)
    assert_allclose(fro_norm, math.sqrt(1 / 16 + 1 / 4))


def test_batch_pinv_matches_single():
    stack = sample_gaussian_batch(6, 2, 3, RngHandle(37))
    batch = batch_pinv_frobenius_sq(stack)
    single = [pinv_norms(M)[1] ** 2 for M in stack]
    assert_allclose(batch, single, rtol=1e-10)


def test_reference_eigendecomposition_sorted():
    A = np.diag([3.0, 1.0, 2.0 + 1j]).astype(complex)
    pairs = reference_eigendecomposition(A)
    assert_allclose([lam for lam, _ in pairs], [1.0, 2.0 + 1j, 3.0])
    for lam, v in pairs:
        assert_allclose(A @ v, lam * v, atol=1e-12)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_pinv_perturbation_keeps_norm_within_eps():
    rng = RngHandle(41)
    n, eps = 5, 0.4
    for _ in range(20):
        U, V = haar_unitary(n, rng), haar_unitary(n, rng)
        s = np.append(np.sort(rng.generator.uniform(0.1, 2.0, n - 1))[::-1], 0.0)
        d = np.append(rng.generator.uniform(-eps, eps, n - 1) * s[-2], 0.0)
        R = U @ np.diag(s) @ V.conj().T
        R_prime = U @ np.diag(s + d) @ V.conj().T
        assert np.linalg.norm(R - R_prime, 2) <= eps * s[-2] * (1 + 1e-12)

        base = pinv_norms(R, rank=n - 1)[0]
        nudged = pinv_norms(R_prime, rank=n - 1)[0]
        assert base / (1 + eps) * (1 - 1e-10) <= nudged <= base / (1 - eps) * (1 + 1e-10)


def test_reference_eigendecomposition_of_jordan_block():
    pairs = reference_eigendecomposition(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert len(pairs) == 2
    for lam, v in pairs:
        assert abs(lam) < 1e-12
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_reference_eigenvalues_multiply_to_determinant():
    A = sample_gaussian_matrix(6, 6, rng=RngHandle(43))
    product = np.prod([lam for lam, _ in reference_eigendecomposition(A)])
    assert_allclose(product, np.linalg.det(A), rtol=1e-8)


def test_reference_eigendecomposition_errors():
    with pytest.raises(DimensionError):
        reference_eigendecomposition(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        reference_eigendecomposition(np.eye(5), cap=4)
    with pytest.raises(OracleError):
        reference_eigendecomposition(np.array([[np.nan, 0], [0, 1]]))


def test_svd_frobenius_identity():
    M = sample_gaussian_matrix(4, 3, rng=RngHandle(61))
    result = svd(M, compute_bases=True)
    s = result.singular_values
    assert all(s[:-1] >= s[1:])
    assert_allclose(np.sum(s ** 2), np.linalg.norm(M) ** 2, rtol=1e-12)
    assert_allclose((result.u * s) @ result.vh, M, atol=1e-12)
    assert result.sigma_max == s[0]
    assert result.sigma_min == s[-1]


def test_svd_rejects_non_finite():
    with pytest.raises(NumericalError):
        svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
