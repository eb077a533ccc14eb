"""
Solution-variety geometry for the eigenvalue problem.

Restricted operator, condition numbers, projective and product
distances, the projective Newton step and the certification
predicates built on them.
"""

import math
from typing import Iterator

import numpy as np

from core_linalg import EPS, orthonormal_complement, pinv_norms, qr_solve, reference_eigendecomposition
from models import (
    ComplexMatrix,
    ConditionReport,
    ContractError,
    CoareaWeight,
    DomainError,
    EigenTriple,
    IllPosedError,
    RankError,
    StepConstants,
)


C0 = StepConstants().c0

# Orthogonal residual, relative to the overlap, below which two unit
# vectors are one projective class
_SAME_CLASS_RESIDUAL = 4.0 * EPS

# Local Lipschitz constants of μ: radius c·‖A₀‖/μ², growth below C
LIPSCHITZ_RADIUS = 1.0 / 200.0
LIPSCHITZ_FACTOR = 1.5


def restricted_operator(t: EigenTriple) -> ComplexMatrix:
    """
    Π_{v⊥}(λI − A)|_{v⊥} in the Householder basis of v⊥.

    Returns:
        (n−1)×(n−1) complex matrix
    """
    Q = orthonormal_complement(t.v)
    shifted = t.lam * np.eye(t.n, dtype=complex) - t.A
    return Q.conj().T @ shifted @ Q


def projected_shift(t: EigenTriple) -> ComplexMatrix:
    """(I − vv*)(λI − A) as an n×n matrix of rank at most n−1."""
    projector = np.eye(t.n, dtype=complex) - np.outer(t.v, t.v.conj())
    return projector @ (t.lam * np.eye(t.n, dtype=complex) - t.A)


def condition_numbers(t: EigenTriple) -> ConditionReport:
    """
    μ and μ_F, extended off the solution variety by the pseudoinverse.

    μ = max(1, ‖A‖_F·‖((I − vv*)(λI − A))†‖), μ_F likewise with the
    Frobenius norm. Both are infinite when the projected shift has
    numerical rank below n−1.
    """
    op_norm, fro_norm = pinv_norms(projected_shift(t), rank=t.n - 1)
    scale = float(np.linalg.norm(t.A))
    return ConditionReport(
        mu=max(1.0, scale * op_norm),
        mu_f=max(1.0, scale * fro_norm),
    )


def mu(t: EigenTriple) -> float:
    return condition_numbers(t).mu


def proj_distance(u: np.ndarray, w: np.ndarray) -> float:
    """
    Riemannian distance between the projective classes of u and w.

    Equals arccos(|⟨u,w⟩|/(‖u‖‖w‖)); evaluated through the sine of the
    angle so that tiny distances keep full relative accuracy. Vectors of
    one class are exactly 0 apart; a residual at rounding level counts
    as one class.

    Raises:
        DomainError: If either vector is zero
    """
    u = np.asarray(u, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    norm_u = np.linalg.norm(u)
    norm_w = np.linalg.norm(w)
    if norm_u == 0.0 or norm_w == 0.0:
        raise DomainError("Projective distance undefined for the zero vector")

    u = u / norm_u
    w = w / norm_w
    if np.array_equal(u, w):
        return 0.0
    overlap = np.vdot(u, w)
    orthogonal = float(np.linalg.norm(w - overlap * u))
    if orthogonal <= _SAME_CLASS_RESIDUAL * abs(overlap):
        return 0.0
    return float(math.atan2(orthogonal, abs(overlap)))


def pair_distance(A1: ComplexMatrix, lam1: complex,
                  A2: ComplexMatrix, lam2: complex) -> float:
    """Projective distance between (A₁, λ₁) and (A₂, λ₂) in P(C^{n²+1})."""
    x = np.append(np.asarray(A1, dtype=complex).ravel(), lam1)
    y = np.append(np.asarray(A2, dtype=complex).ravel(), lam2)
    return proj_distance(x, y)


def dP2(t1: EigenTriple, t2: EigenTriple) -> float:
    """ℓ² product of the (matrix, eigenvalue) and eigenvector distances."""
    return math.hypot(
        pair_distance(t1.A, t1.lam, t2.A, t2.lam),
        proj_distance(t1.v, t2.v),
    )


def newton_step(t: EigenTriple) -> EigenTriple:
    """
    One projective Newton step N_A(λ, v).

    v̇ ∈ v⊥ solves the restricted system, λ̇ = ⟨(λI − A)(v − v̇), v⟩.
    The new vector is renormalized.

    Raises:
        IllPosedError: If the restricted operator is numerically singular
    """
    Q = orthonormal_complement(t.v)
    shifted = t.lam * np.eye(t.n, dtype=complex) - t.A
    restricted = Q.conj().T @ shifted @ Q
    rhs = Q.conj().T @ (shifted @ t.v)

    try:
        v_dot = Q @ qr_solve(restricted, rhs)
    except RankError as e:
        raise IllPosedError(f"Restricted operator is singular: {e}")

    v_new = t.v - v_dot
    lam_dot = np.vdot(t.v, shifted @ v_new)
    v_new = v_new / np.linalg.norm(v_new)
    return EigenTriple(t.A, complex(t.lam - lam_dot), v_new)


def newton_iterates(t: EigenTriple, steps: int) -> Iterator[EigenTriple]:
    """Yield the first `steps` Newton iterates of t."""
    current = t
    for _ in range(steps):
        current = newton_step(current)
        yield current


def certify_approximate(t: EigenTriple, exact: EigenTriple,
                        c0: float = C0) -> bool:
    """
    True iff t lies in the c₀/μ(exact) ball around an exact eigenpair.

    Inside that ball Newton's iteration converges immediately and
    quadratically to `exact`.

    Raises:
        ContractError: If `exact` is not an eigenpair or is ill-posed
    """
    scale = float(np.linalg.norm(exact.A))
    if exact.residual() > 1e-12 * max(scale, 1.0):
        raise ContractError(
            f"Reference pair is not exact (residual {exact.residual():.3e})"
        )
    mu_exact = mu(exact)
    if not math.isfinite(mu_exact):
        raise ContractError("Reference pair is ill-posed (infinite mu)")
    return dP2(t, exact) <= c0 / mu_exact


def mu_perturbation_bound(t: EigenTriple, t_prime: EigenTriple, eps: float) -> bool:
    """
    Check μ(t)/(1+ε) ≤ μ(t') ≤ μ(t)/(1−ε) for a nearby triple.

    Preconditions: ‖A‖_F = 1, t on the well-posed variety, same matrix
    in both triples, ε ∈ (0, 1/2], dP2(t, t') ≤ ε/(5μ(t)).

    Raises:
        ContractError: If a precondition fails
    """
    if not 0.0 < eps <= 0.5:
        raise ContractError(f"eps must be in (0, 1/2], got {eps}")
    if not np.array_equal(t.A, t_prime.A):
        raise ContractError("Both triples must share the matrix")
    if abs(np.linalg.norm(t.A) - 1.0) > 1e-12:
        raise ContractError("Matrix must have unit Frobenius norm")

    mu_t = mu(t)
    if not math.isfinite(mu_t):
        raise ContractError("Base triple is ill-posed (infinite mu)")
    if dP2(t, t_prime) > eps / (5.0 * mu_t):
        raise ContractError("Perturbed triple is outside the eps/(5 mu) ball")

    mu_prime = mu(t_prime)
    return mu_t / (1.0 + eps) <= mu_prime <= mu_t / (1.0 - eps)


def continued_pair(t0: EigenTriple, A: ComplexMatrix) -> EigenTriple:
    """Reference eigenpair of a nearby matrix A closest in dP2 to t0."""
    candidates = [EigenTriple.from_pair(A, lam, v) for lam, v in reference_eigendecomposition(A)]
    return min(candidates, key=lambda c: dP2(t0, c))


def mu_lipschitz_bound(t0: EigenTriple, A: ComplexMatrix,
                       radius: float = LIPSCHITZ_RADIUS,
                       factor: float = LIPSCHITZ_FACTOR) -> bool:
    """
    Check μ(A, λ, v) < factor·μ(t0) for the pair of A continued from t0.

    Precondition: t0 is an exact well-posed eigenpair and
    ‖A − A₀‖_F ≤ radius·‖A₀‖_F/μ(t0)².

    Raises:
        ContractError: If a precondition fails
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != t0.A.shape:
        raise ContractError(f"Shapes differ: {A.shape} vs {t0.A.shape}")
    scale = float(np.linalg.norm(t0.A))
    if t0.residual() > 1e-12 * max(scale, 1.0):
        raise ContractError(
            f"Base pair is not exact (residual {t0.residual():.3e})"
        )
    mu_0 = mu(t0)
    if not math.isfinite(mu_0):
        raise ContractError("Base triple is ill-posed (infinite mu)")
    if np.linalg.norm(A - t0.A) > radius * scale / mu_0 ** 2:
        raise ContractError("Matrix is outside the radius/mu^2 ball")

    return mu(continued_pair(t0, A)) < factor * mu_0


def coarea_weight(t: EigenTriple) -> CoareaWeight:
    """|det A_{λ,v}|², twice the normal-Jacobian quotient at t."""
    det = np.linalg.det(restricted_operator(t)) if t.n > 1 else 1.0
    return CoareaWeight(float(abs(det) ** 2))
