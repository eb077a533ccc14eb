"""
Dense complex linear algebra kernel and random sampling.

Provides:
- Complex Gaussian, truncated Gaussian and sphere-uniform matrices
- Householder QR with a frozen sign convention
- Haar unitaries by phase-corrected QR
- SVD norms and pseudoinverse norms
- Reference eigendecomposition (test oracle only)

All functions are pure given their inputs; randomness flows from
the caller's RngHandle.
"""

import math
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from models import (
    ComplexMatrix,
    DimensionError,
    NumericalError,
    OracleError,
    RankError,
    RngHandle,
    SvdResult,
)


EPS = 2.0 ** -52

# Largest matrix the reference eigensolver accepts
ORACLE_CAP = 64


def complex_gaussian(rng: RngHandle, shape) -> np.ndarray:
    """Standard complex Gaussian N_C(0, 1): components of variance 1/2."""
    g = rng.generator.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return (g[0] + 1j * g[1]) / math.sqrt(2.0)


def sample_gaussian_matrix(rows: int,
                           cols: int,
                           center: Optional[ComplexMatrix] = None,
                           sigma: float = 1.0,
                           rng: Optional[RngHandle] = None) -> ComplexMatrix:
    """
    Draw a Gaussian complex matrix centered at `center`.

    Args:
        rows, cols: Shape of the sample
        center: Mean matrix (zero when None)
        sigma: Entry standard deviation; each part has variance sigma²/2
        rng: Random stream

    Returns:
        rows×cols complex matrix

    Raises:
        DimensionError: If center has another shape
    """
    if rng is None:
        raise ValueError("A random stream is required")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if rows < 1 or cols < 1:
        raise DimensionError(f"Invalid shape {rows}x{cols}")

    sample = sigma * complex_gaussian(rng, (rows, cols))
    if center is None:
        return sample

    center = np.asarray(center, dtype=complex)
    if center.shape != (rows, cols):
        raise DimensionError(
            f"Center shape {center.shape} does not match {rows}x{cols}"
        )
    return center + sample


def sample_gaussian_batch(count: int, rows: int, cols: int,
                          rng: RngHandle, sigma: float = 1.0,
                          center: Optional[ComplexMatrix] = None) -> np.ndarray:
    """Stack of `count` independent Gaussian matrices, shape (count, rows, cols)."""
    sample = sigma * complex_gaussian(rng, (count, rows, cols))
    if center is not None:
        sample = sample + np.asarray(center, dtype=complex)[None, :, :]
    return sample


def sample_truncated_gaussian(n: int,
                              radius: float,
                              rng: RngHandle,
                              center: Optional[ComplexMatrix] = None,
                              sigma: float = 1.0,
                              max_draws: int = 1_000_000) -> Tuple[ComplexMatrix, int]:
    """
    Gaussian n×n matrix conditioned on ‖A − center‖_F ≤ radius.

    Returns:
        (matrix, number of draws used)
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")

    for draws in range(1, max_draws + 1):
        sample = sample_gaussian_matrix(n, n, center, sigma, rng)
        offset = sample if center is None else sample - center
        if np.linalg.norm(offset) <= radius:
            return sample, draws

    raise NumericalError(
        f"Truncated sampler exhausted {max_draws} draws at radius {radius}"
    )


def sample_sphere_matrix(n: int, rng: RngHandle) -> ComplexMatrix:
    """Uniform point on the unit Frobenius sphere of n×n complex matrices."""
    sample = complex_gaussian(rng, (n, n))
    return sample / np.linalg.norm(sample)


def frobenius_inner(A: ComplexMatrix, B: ComplexMatrix) -> complex:
    """⟨A, B⟩ = Σ a_ij · conj(b_ij)."""
    return complex(np.vdot(B, A))


def _phase(x: complex) -> complex:
    """x/|x|, with phase(0) = 1."""
    magnitude = abs(x)
    return x / magnitude if magnitude > 0.0 else 1.0 + 0.0j


def householder_vector(x: np.ndarray) -> Tuple[np.ndarray, complex]:
    """
    Unit Householder vector u with (I − 2uu*)x = alpha·e₁.

    alpha = −phase(x₁)·‖x‖, so no cancellation occurs in u.
    """
    norm_x = np.linalg.norm(x)
    alpha = -_phase(x[0]) * norm_x
    u = x.astype(complex, copy=True)
    u[0] -= alpha
    norm_u = np.linalg.norm(u)
    if norm_u == 0.0:
        return u, alpha
    return u / norm_u, alpha


def householder_qr_reduced(M: ComplexMatrix) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """
    Reduced QR of an n×k matrix (k ≤ n) by Householder reflections.

    The diagonal of R satisfies r_jj = −phase(x₁)·‖x‖ for the active
    column x at step j. This fixes the map M ↦ Q.

    Returns:
        (Q n×k with orthonormal columns, R k×k upper triangular)

    Raises:
        DimensionError: If k > n
        RankError: If a column is (numerically) dependent on the previous ones
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"Expected a matrix, got shape {M.shape}")
    n, k = M.shape
    if k > n:
        raise DimensionError(f"Reduced QR needs rows >= cols, got {n}x{k}")
    if not np.all(np.isfinite(M)):
        raise NumericalError("Non-finite entries in QR input")

    tol = 16 * max(n, k) * EPS * np.linalg.norm(M)
    work = M.copy()
    reflectors: List[np.ndarray] = []

    for j in range(k):
        x = work[j:, j]
        if np.linalg.norm(x) <= tol:
            raise RankError(f"Column {j} is linearly dependent (rank < {k})")
        u, alpha = householder_vector(x)
        block = work[j:, j:]
        block -= 2.0 * np.outer(u, u.conj() @ block)
        work[j, j] = alpha
        work[j + 1:, j] = 0.0
        reflectors.append(u)

    Q = np.eye(n, k, dtype=complex)
    for j in reversed(range(k)):
        u = reflectors[j]
        Q[j:, :] -= 2.0 * np.outer(u, u.conj() @ Q[j:, :])

    return Q, np.triu(work[:k, :])


def orthonormal_complement(v: np.ndarray) -> ComplexMatrix:
    """
    n×(n−1) orthonormal basis of v⊥ by Householder completion.

    The columns 2..n of the reflector mapping v to a multiple of e₁.
    """
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    u, _ = householder_vector(v)
    H = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj())
    return H[:, 1:]


def qr_solve(R: ComplexMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve the square system R x = rhs through Householder QR."""
    Q, T = householder_qr_reduced(R)
    return scipy.linalg.solve_triangular(T, Q.conj().T @ rhs, lower=False)


def haar_unitary(n: int, rng: RngHandle) -> ComplexMatrix:
    """
    Haar-distributed n×n unitary.

    QR of a Ginibre matrix, then columns rescaled by r_ii/|r_ii| so
    that the factorization is the unique one with positive diagonal.
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    Q, R = householder_qr_reduced(complex_gaussian(rng, (n, n)))
    diag = np.diagonal(R)
    return Q * (diag / np.abs(diag))


def svd(M: ComplexMatrix, compute_bases: bool = False) -> SvdResult:
    """
    Singular value decomposition.

    Raises:
        NumericalError: On non-finite input or LAPACK non-convergence
    """
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise NumericalError("Non-finite entries in SVD input")
    try:
        if compute_bases:
            u, s, vh = np.linalg.svd(M, full_matrices=False)
            return SvdResult(s, u, vh)
        return SvdResult(np.linalg.svd(M, compute_uv=False))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge: {e}")


def rank_tolerance(shape: Tuple[int, int], sigma_max: float) -> float:
    return max(shape) * sigma_max * EPS


def pinv_norms(M: ComplexMatrix, rank: Optional[int] = None) -> Tuple[float, float]:
    """
    Operator and Frobenius norms of the Moore–Penrose pseudoinverse.

    Args:
        M: Any complex matrix
        rank: Expected rank; only the leading `rank` singular values are
            used (default min(rows, cols))

    Returns:
        (‖M†‖, ‖M†‖_F); both infinite when σ_rank falls under the
        numerical-rank tolerance, i.e. the problem is ill-posed
    """
    M = np.asarray(M, dtype=complex)
    if rank is None:
        rank = min(M.shape)
    if rank == 0:
        return 0.0, 0.0

    s = svd(M).singular_values
    if s[0] == 0.0 or s[rank - 1] <= rank_tolerance(M.shape, s[0]):
        return math.inf, math.inf

    leading = s[:rank]
    return float(1.0 / leading[-1]), float(np.sqrt(np.sum(1.0 / leading ** 2)))


def batch_pinv_frobenius_sq(stack: np.ndarray, rank: Optional[int] = None) -> np.ndarray:
    """‖M†‖_F² for every matrix in a (count, rows, cols) stack."""
    s = np.linalg.svd(stack, compute_uv=False)
    if rank is None:
        rank = min(stack.shape[1:])
    leading = s[:, :rank]
    tol = max(stack.shape[1:]) * s[:, :1] * EPS
    with np.errstate(divide="ignore"):
        values = np.sum(1.0 / leading ** 2, axis=1)
    values[np.any(leading <= tol, axis=1)] = np.inf
    return values


def reference_eigendecomposition(A: ComplexMatrix,
                                 cap: int = ORACLE_CAP) -> List[Tuple[complex, np.ndarray]]:
    """
    All n eigenpairs of A from the LAPACK dense eigensolver.

    Hessenberg reduction, shifted QR iteration and back-substituted
    vectors. Eigenvalues are repeated per multiplicity and sorted by
    (real, imaginary) part. Test oracle only: no certification.

    Raises:
        DimensionError: If A is not square or exceeds the cap
        OracleError: On non-convergence or an unacceptable residual
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"Oracle needs a square matrix, got {A.shape}")
    n = A.shape[0]
    if n > cap:
        raise DimensionError(f"Oracle cap is {cap}, got n={n}")
    if not np.all(np.isfinite(A)):
        raise OracleError("Non-finite entries in oracle input")

    try:
        values, vectors = scipy.linalg.eig(A)
    except scipy.linalg.LinAlgError as e:
        raise OracleError(f"Reference eigensolver failed: {e}")

    scale = max(np.linalg.norm(A), 1.0)
    pairs = []
    for k in np.lexsort((values.imag, values.real)):
        v = vectors[:, k] / np.linalg.norm(vectors[:, k])
        lam = complex(values[k])
        if np.linalg.norm(A @ v - lam * v) > 1e-8 * scale:
            raise OracleError(f"Oracle residual too large for eigenvalue {lam}")
        pairs.append((lam, v))
    return pairs


def batch_eigendecomposition(stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (count, n) and unit eigenvector columns (count, n, n) of a stack."""
    try:
        values, vectors = np.linalg.eig(stack)
    except np.linalg.LinAlgError as e:
        raise OracleError(f"Batched eigensolver failed: {e}")
    vectors = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    return values, vectors
