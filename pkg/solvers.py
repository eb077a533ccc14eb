"""
Eigenpair solvers built on the certified tracker.

Algorithm a: deterministic, all n eigenpairs, from a diagonal start
whose eigenvalues are hexagonal lattice points.

Algorithm b: randomized, one eigenpair, from a block-triangular start
drawn through the Ω_n rejection sampler and assembled by φ_n.
"""

import logging
import math
import time
from typing import List, Optional, Tuple

import numpy as np

from core_linalg import (
    complex_gaussian,
    haar_unitary,
    householder_qr_reduced,
    pinv_norms,
    sample_gaussian_matrix,
)
from eigen_geometry import mu
from homotopy import PathTracker, connect, refine_and_certify, rescale_to_input
from matching import find_coincident_pairs
from models import (
    BudgetExceededError,
    ComplexMatrix,
    DegeneratePathError,
    DimensionError,
    GreatCirclePath,
    IllPosedError,
    OmegaSample,
    PathOutcome,
    PathStatus,
    RankError,
    RngHandle,
    SolveOutput,
    SolverBudget,
    StartSystem,
)
from threading_worker import WorkerPool
from validator import MatrixValidator


logger = logging.getLogger("eigenflow.solvers")

_SIXTH_TURN = complex(math.cos(math.pi / 3.0), math.sin(math.pi / 3.0))

# Upper bound on phi_n rank failures before giving up (measure-zero event)
_MAX_START_REDRAWS = 100


# ---------------------------------------------------------------------------
# Hexagonal start (algorithm a)
# ---------------------------------------------------------------------------

def hexagonal_lattice_points(n: int) -> List[complex]:
    """
    First n centers of the unit-side hexagonal tiling.

    Centers are √3(a + b·e^{iπ/3}); they are ordered by modulus, then
    by argument in [0, 2π). The first point is 0 and the first ring
    starts on the positive real axis.
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")

    radius = 1
    while True:
        span = np.arange(-radius, radius + 1)
        a, b = np.meshgrid(span, span, indexing="ij")
        a, b = a.ravel(), b.ravel()
        norms = a * a + a * b + b * b
        # every lattice point with a²+ab+b² ≤ 3r²/4 lies in the window
        complete = norms <= (3 * radius * radius) // 4
        if np.count_nonzero(complete) >= n:
            break
        radius *= 2

    a, b, norms = a[complete], b[complete], norms[complete]
    points = math.sqrt(3.0) * (a + b * _SIXTH_TURN)
    angles = np.mod(np.angle(points), 2.0 * math.pi)
    angles[norms == 0] = 0.0
    order = np.lexsort((angles, norms))[:n]
    return [complex(points[k]) for k in order]


def hexagonal_start(n: int) -> StartSystem:
    """
    Diagonal start matrix on the hexagonal lattice with its n eigenpairs.

    Also records μ(A₀)² = ‖A₀‖_F²·max_{i≠j}|λᵢ − λⱼ|⁻².
    """
    if n < 2:
        raise DimensionError(f"Hexagonal start needs n >= 2, got {n}")

    lams = np.array(hexagonal_lattice_points(n))
    A0 = np.diag(lams).astype(complex)
    identity = np.eye(n, dtype=complex)
    pairs = [(complex(lams[i]), identity[:, i].copy()) for i in range(n)]

    gaps = np.abs(lams[:, None] - lams[None, :])
    min_gap = np.min(gaps[~np.eye(n, dtype=bool)])
    mu_squared = float(np.linalg.norm(A0) ** 2 / min_gap ** 2)

    return StartSystem(A0=A0, pairs=pairs, mu_squared=mu_squared)


# ---------------------------------------------------------------------------
# Random start (algorithm b)
# ---------------------------------------------------------------------------

def omega_accepts(n: int, z: complex, M: ComplexMatrix) -> bool:
    """Acceptance predicate n·|z|·‖M†‖_F ≤ 1."""
    _, fro = pinv_norms(M)
    return n * abs(z) * fro <= 1.0


def sample_omega(n: int, rng: RngHandle) -> OmegaSample:
    """
    Draw (z, M, U, w) from the start space by rejection.

    z = y/√(2n³) with y standard complex Gaussian and M an (n−1)×n
    Gaussian matrix are redrawn together until n|z|‖M†‖_F ≤ 1. Then
    w (length n−1) is Gaussian and U is Haar on U(n−1).
    """
    if n < 2:
        raise DimensionError(f"Random start needs n >= 2, got {n}")

    scale = math.sqrt(2.0 * n ** 3)
    rejections = 0
    while True:
        z = complex(complex_gaussian(rng, 1)[0]) / scale
        M = sample_gaussian_matrix(n - 1, n, rng=rng)
        if omega_accepts(n, z, M):
            break
        rejections += 1

    w = complex_gaussian(rng, n - 1)
    U = haar_unitary(n - 1, rng)
    return OmegaSample(z=z, M=M, U=U, w=w, rejections=rejections)


def phi_n(sample: OmegaSample) -> StartSystem:
    """
    Assemble A₀ = [[z, w*], [0, M·Q_M·U]] with known eigenpair (z, e₁).

    Q_M is the Q factor of the reduced QR decomposition of M*.

    Raises:
        RankError: If M* is rank deficient (redraw the sample)
    """
    n = sample.n
    Q_M, _ = householder_qr_reduced(sample.M.conj().T)
    block = sample.M @ Q_M @ sample.U

    A0 = np.zeros((n, n), dtype=complex)
    A0[0, 0] = sample.z
    A0[0, 1:] = sample.w.conj()
    A0[1:, 1:] = block

    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    return StartSystem(A0=A0, pairs=[(sample.z, e1)], omega=sample)


def draw_random_start(n: int, rng: RngHandle) -> StartSystem:
    """sample_omega followed by phi_n, redrawing on a rank failure."""
    for _ in range(_MAX_START_REDRAWS):
        try:
            return phi_n(sample_omega(n, rng))
        except RankError:
            logger.warning("Rank-deficient M in random start; redrawing")
    raise RankError(f"No full-rank start after {_MAX_START_REDRAWS} draws")


# ---------------------------------------------------------------------------
# Path execution
# ---------------------------------------------------------------------------

def solve_path(index: int,
               path: GreatCirclePath,
               start_pair: Tuple[complex, np.ndarray],
               A: ComplexMatrix,
               budget: SolverBudget) -> PathOutcome:
    """
    Track one path to A/‖A‖_F, rescale to A and certify by refinement.

    Failures are recorded in the outcome, never raised.
    """
    outcome = PathOutcome(index=index)
    tracker = PathTracker(budget.constants, budget.max_steps, budget.trace)
    started = time.perf_counter()

    try:
        result = tracker.track(path, start_pair)
        outcome.steps = result.steps
        outcome.trace = result.trace
        refinement = refine_and_certify(rescale_to_input(result.final, A))
        outcome.triple = refinement.triple
        outcome.residuals = refinement.residuals
        outcome.certified = refinement.certified
        outcome.mu = mu(refinement.triple)
        outcome.status = PathStatus.TRACKED

    except BudgetExceededError as e:
        outcome.status = PathStatus.BUDGET_EXCEEDED
        outcome.steps = e.steps
        outcome.error_message = str(e)

    except IllPosedError as e:
        outcome.status = PathStatus.ILL_POSED
        if tracker.state is not None:
            outcome.steps = tracker.state.steps
        outcome.error_message = str(e)

    elapsed_ms = (time.perf_counter() - started) * 1000
    if outcome.succeeded:
        logger.info(f"Path {index}: {outcome.steps} steps, mu={outcome.mu:.4g}, {elapsed_ms:.1f} ms")
    else:
        logger.warning(f"Path {index} failed ({outcome.status.value}): {outcome.error_message}")
    return outcome


def _start_on_sphere(start: StartSystem, pair_index: int) -> Tuple[complex, np.ndarray]:
    lam, v = start.pairs[pair_index]
    return lam / np.linalg.norm(start.A0), v


def _failed(index: int, message: str) -> PathOutcome:
    return PathOutcome(index=index, status=PathStatus.ILL_POSED, error_message=message)


def reject_coincident(outcomes: List[PathOutcome]) -> int:
    """
    Fail every later path that ended on the same eigenpair as an earlier one.

    Returns:
        Number of paths rejected
    """
    succeeded = [o for o in outcomes if o.succeeded]
    rejected = set()
    for i, j in find_coincident_pairs([o.triple for o in succeeded]):
        if j in rejected:
            continue
        duplicate = succeeded[j]
        duplicate.status = PathStatus.COINCIDENT
        duplicate.error_message = f"Path jumped onto the eigenpair of path {succeeded[i].index}"
        logger.warning(f"Path {duplicate.index} failed (coincident): {duplicate.error_message}")
        rejected.add(j)
    return len(rejected)


def algorithm_a(A: ComplexMatrix, budget: Optional[SolverBudget] = None) -> SolveOutput:
    """
    All n eigenpairs of A by tracking the n lattice eigenpairs.

    Paths run on a WorkerPool of `budget.threads` workers. Failed
    paths are listed in `failed_paths`; the remaining pairs are still
    returned.

    Raises:
        DimensionError: If A is not square or n < 2
        NumericalError: If A has non-finite entries
    """
    budget = budget or SolverBudget()
    A = MatrixValidator.require(A)
    n = A.shape[0]
    started = time.perf_counter()

    start = hexagonal_start(n)
    try:
        path = connect(start.A0, A)
    except DegeneratePathError as e:
        message = f"Input is a negative multiple of the start matrix, no great circle joins them ({e})"
        logger.error(message)
        outcomes = [_failed(i, message) for i in range(n)]
    else:
        logger.info(f"Algorithm a: n={n}, arc length {path.arc_length:.6g}")
        pool = WorkerPool(budget.threads)
        results = pool.map_ordered(
            lambda i: solve_path(i, path, _start_on_sphere(start, i), A, budget),
            range(n),
        )
        outcomes = [
            r.data if r.success else _failed(i, r.error or "worker failure")
            for i, r in enumerate(results)
        ]

    reject_coincident(outcomes)
    return SolveOutput(
        pairs=[o.triple for o in outcomes if o.succeeded],
        steps_per_path=[o.steps for o in outcomes],
        wall_time_ms=(time.perf_counter() - started) * 1000,
        algorithm="a",
        outcomes=outcomes,
        start=start,
    )


def algorithm_b(A: ComplexMatrix,
                rng: RngHandle,
                budget: Optional[SolverBudget] = None) -> SolveOutput:
    """
    One eigenpair of A from a random start.

    A failed path is retried once with a fresh start from the same
    stream before the failure is reported.
    """
    budget = budget or SolverBudget()
    A = MatrixValidator.require(A)
    n = A.shape[0]
    seed_echo = RngHandle(rng.seed, rng.stream_id)
    started = time.perf_counter()

    rejections = 0
    outcome: Optional[PathOutcome] = None
    for attempt in range(2):
        start = draw_random_start(n, rng)
        rejections += start.omega.rejections
        try:
            path = connect(start.A0, A)
        except DegeneratePathError as e:
            outcome = _failed(0, str(e))
        else:
            outcome = solve_path(0, path, _start_on_sphere(start, 0), A, budget)
        if outcome.succeeded:
            break
        if attempt == 0:
            logger.warning("Random-start path failed; retrying with a new start")

    return SolveOutput(
        pairs=[outcome.triple] if outcome.succeeded else [],
        steps_per_path=[outcome.steps],
        wall_time_ms=(time.perf_counter() - started) * 1000,
        seed=seed_echo,
        algorithm="b",
        outcomes=[outcome],
        rejections=rejections,
        start=start,
    )
