"""
Tests for condition numbers, distances, Newton steps and certification.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core_linalg import (
    complex_gaussian,
    haar_unitary,
    reference_eigendecomposition,
    sample_gaussian_matrix,
)
from eigen_geometry import (
    C0,
    LIPSCHITZ_RADIUS,
    certify_approximate,
    coarea_weight,
    condition_numbers,
    dP2,
    mu,
    mu_lipschitz_bound,
    mu_perturbation_bound,
    newton_iterates,
    newton_step,
    pair_distance,
    proj_distance,
    restricted_operator,
)
from models import ContractError, DomainError, EigenTriple, RngHandle


def e(n, k):
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def random_exact_triple(n, seed):
    A = sample_gaussian_matrix(n, n, rng=RngHandle(seed))
    A /= np.linalg.norm(A)
    lam, v = reference_eigendecomposition(A)[0]
    return EigenTriple.from_pair(A, lam, v)


def test_proj_distance_ignores_scale_and_phase():
    v = complex_gaussian(RngHandle(1), 4)
    assert proj_distance(v, (2.0 - 3.0j) * v) < 1e-14


def test_proj_distance_orthogonal():
    assert_allclose(proj_distance(e(3, 0), e(3, 2)), math.pi / 2)


def test_proj_distance_small_angle_is_accurate():
    angle = 1e-10
    w = math.cos(angle) * e(2, 0) + math.sin(angle) * e(2, 1)
    assert_allclose(proj_distance(e(2, 0), w), angle, rtol=1e-6)


def test_proj_distance_zero_vector():
    with pytest.raises(DomainError):
        proj_distance(np.zeros(3), e(3, 0))


def test_dP2_of_identical_triples():
    t = random_exact_triple(3, 2)
    assert dP2(t, t) == 0.0


def test_mu_of_diagonal_pair():
    A = np.diag([1.0, 2.0]).astype(complex) / math.sqrt(5.0)
    t = EigenTriple.from_pair(A, 1.0 / math.sqrt(5.0), e(2, 0))
    report = condition_numbers(t)
    assert_allclose(report.mu, math.sqrt(5.0))
    assert_allclose(report.mu_f, math.sqrt(5.0))


def test_mu_f_dominates_mu():
    for seed in range(5):
        report = condition_numbers(random_exact_triple(4, seed))
        assert report.mu_f >= report.mu - 1e-12
        assert report.mu >= 1.0


def test_mu_is_scale_invariant():
    t = random_exact_triple(3, 8)
    scaled = EigenTriple(7.0 * t.A, 7.0 * t.lam, t.v)
    assert_allclose(mu(scaled), mu(t), rtol=1e-10)


def test_mu_infinite_for_double_eigenvalue():
    A = np.diag([1.0, 1.0, 2.0]).astype(complex)
    t = EigenTriple.from_pair(A, 1.0, e(3, 0))
    assert mu(t) == math.inf
    assert not condition_numbers(t).is_finite


def test_restricted_operator_of_diagonal():
    A = np.diag([1.0, 2.0, 3.0]).astype(complex)
    t = EigenTriple.from_pair(A, 1.0, e(3, 0))
    restricted = restricted_operator(t)
    assert restricted.shape == (2, 2)
    assert_allclose(sorted(np.linalg.eigvals(restricted).real), [-2.0, -1.0], atol=1e-13)
    assert_allclose(coarea_weight(t).value, 4.0)


def test_coarea_weight_matches_triangular_form():
    rng = RngHandle(13)
    lam = complex(complex_gaussian(rng, 1)[0])
    w = complex_gaussian(rng, 3)
    B = complex_gaussian(rng, (3, 3))

    A = np.zeros((4, 4), dtype=complex)
    A[0, 0] = lam
    A[0, 1:] = w.conj()
    A[1:, 1:] = B

    t = EigenTriple.from_pair(A, lam, e(4, 0))
    assert_allclose(coarea_weight(t).value, abs(np.linalg.det(B - lam * np.eye(3))) ** 2, rtol=1e-10)


def test_newton_fixes_exact_pair():
    t = random_exact_triple(4, 3)
    refined = newton_step(t)
    assert dP2(refined, t) < 1e-13
    assert refined.residual() < 1e-13


def test_newton_converges_quadratically():
    exact = random_exact_triple(4, 21)
    direction = complex_gaussian(RngHandle(22), 4)
    direction -= exact.v * np.vdot(exact.v, direction)
    direction /= np.linalg.norm(direction)
    d = C0 / (4.0 * mu(exact))
    start = EigenTriple.from_pair(exact.A, exact.lam, math.cos(d) * exact.v + math.sin(d) * direction)

    distances = [dP2(start, exact)] + [dP2(t, exact) for t in newton_iterates(start, 3)]
    for k in (1, 2, 3):
        assert distances[k] <= 2.0 ** (1 - 2 ** k) * distances[0] + 1e-14
    assert distances[3] < 1e-8


def test_certify_approximate():
    exact = random_exact_triple(3, 4)
    assert certify_approximate(exact, exact)

    far = EigenTriple(exact.A, exact.lam + 1.0, exact.v)
    assert not certify_approximate(far, exact)

    with pytest.raises(ContractError):
        certify_approximate(exact, far)


def test_mu_perturbation_bound_inside_ball():
    t = random_exact_triple(3, 5)
    eps = 0.25
    nudged = EigenTriple(t.A, t.lam + eps / (20.0 * mu(t)), t.v)
    assert mu_perturbation_bound(t, nudged, eps)


def test_mu_perturbation_bound_preconditions():
    t = random_exact_triple(3, 6)
    with pytest.raises(ContractError):
        mu_perturbation_bound(t, t, 0.75)

    far = EigenTriple(t.A, t.lam + 10.0, t.v)
    with pytest.raises(ContractError):
        mu_perturbation_bound(t, far, 0.25)

    unnormalized = EigenTriple(2.0 * t.A, 2.0 * t.lam, t.v)
    with pytest.raises(ContractError):
        mu_perturbation_bound(unnormalized, unnormalized, 0.25)


def test_mu_infinite_for_jordan_block():
    A = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    for lam, v in reference_eigendecomposition(A):
        assert mu(EigenTriple.from_pair(A, lam, v)) == math.inf


def test_mu_is_unitarily_invariant():
    t = random_exact_triple(4, 9)
    U = haar_unitary(4, RngHandle(10))
    rotated = EigenTriple(U @ t.A @ U.conj().T, t.lam, U @ t.v)
    assert_allclose(mu(rotated), mu(t), rtol=1e-10)


def test_dP2_is_symmetric_and_satisfies_triangle_inequality():
    for seed in range(5):
        a, b, c = (random_exact_triple(3, 100 * seed + k) for k in range(3))
        assert_allclose(dP2(a, b), dP2(b, a), rtol=1e-12)
        assert dP2(a, c) <= dP2(a, b) + dP2(b, c) + 1e-12


def test_pair_distance_between_eigenvalues_zero_and_one():
    A = np.diag([1.0, 0.0]).astype(complex)
    assert_allclose(pair_distance(A, 0.0, A, 1.0), math.pi / 4)
    t0 = EigenTriple.from_pair(A, 0.0, e(2, 1))
    t1 = EigenTriple.from_pair(A, 1.0, e(2, 1))
    assert_allclose(dP2(t0, t1), math.pi / 4)


def test_mu_lipschitz_bound_inside_ball():
    rng = RngHandle(31)
    for seed in range(5):
        t = random_exact_triple(3, 30 + seed)
        assert mu_lipschitz_bound(t, t.A)

        direction = sample_gaussian_matrix(3, 3, rng=rng)
        direction /= np.linalg.norm(direction)
        A = t.A + 0.9 * LIPSCHITZ_RADIUS / mu(t) ** 2 * direction
        assert mu_lipschitz_bound(t, A)


def test_mu_lipschitz_bound_preconditions():
    t = random_exact_triple(3, 36)
    outside = t.A + 2.0 * LIPSCHITZ_RADIUS / mu(t) ** 2 * np.eye(3) / math.sqrt(3.0)
    with pytest.raises(ContractError):
        mu_lipschitz_bound(t, outside)

    shifted = EigenTriple(t.A, t.lam + 0.5, t.v)
    with pytest.raises(ContractError):
        mu_lipschitz_bound(shifted, t.A)

    with pytest.raises(ContractError):
        mu_lipschitz_bound(t, np.eye(2))
