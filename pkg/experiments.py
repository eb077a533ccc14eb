"""
Monte Carlo verification harness.

Every experiment draws its samples in fixed blocks, block k from the
stream rng.derive(k), so reports are identical for a given seed no
matter how many worker threads run the blocks. Heavy-tailed quantities
are estimated by median-of-means over those blocks; plain means are
reported alongside.

Equality experiments compare an estimate with an exact value; bound
experiments are one-sided; scaling tables are informational.
"""

import dataclasses
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from core_linalg import (
    batch_eigendecomposition,
    batch_pinv_frobenius_sq,
    complex_gaussian,
    reference_eigendecomposition,
    sample_gaussian_batch,
    sample_gaussian_matrix,
    sample_truncated_gaussian,
)
from eigen_geometry import LIPSCHITZ_RADIUS, coarea_weight, dP2, mu, mu_lipschitz_bound, newton_iterates
from homotopy import connect
from matching import matching_distance, nearest_pair
from models import (
    ComplexMatrix,
    EigenflowError,
    EigenTriple,
    ExperimentReport,
    GreatCirclePath,
    ReportKind,
    RngHandle,
    SolveOutput,
    SolverBudget,
    StepConstants,
)
from solvers import algorithm_a, algorithm_b, hexagonal_start, phi_n, sample_omega
from threading_worker import WorkerPool


logger = logging.getLogger("eigenflow.experiments")

BLOCKS = 20
Z95 = float(stats.norm.ppf(0.975))

# Relative tolerances of the equality experiments
DET_MOMENT_TOLERANCE = 0.10
INV_DET_MOMENT_TOLERANCE = 0.15
PINV_MOMENT_TOLERANCE = 0.20
GEODESIC_TOLERANCE = 0.01

NEWTON_FLOOR = 1e-14
STEP_BOUND_FACTOR = 1000.0
HEXAGONAL_SLACK = 25.0

CoareaFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def mean_ci(values: np.ndarray) -> Tuple[float, float]:
    """Sample mean and 95% normal half-width."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(np.mean(values)), math.inf
    return float(np.mean(values)), Z95 * float(np.std(values, ddof=1)) / math.sqrt(values.size)


def median_of_means(values: np.ndarray, blocks: int = BLOCKS) -> Tuple[float, float, float]:
    """
    Median of block means.

    Returns:
        (estimate, 95% half-width, plain mean). The half-width uses the
        asymptotic √(π/2) inflation of the median over the mean.
    """
    values = np.asarray(values, dtype=float)
    blocks = max(1, min(blocks, values.size))
    means = np.array([chunk.mean() for chunk in np.array_split(values, blocks)])
    estimate = float(np.median(means))
    if blocks < 2:
        return estimate, math.inf, float(values.mean())
    half_width = Z95 * math.sqrt(math.pi / 2.0) * float(np.std(means, ddof=1)) / math.sqrt(blocks)
    return estimate, half_width, float(values.mean())


def sample_blocks(draw: Callable[[int, RngHandle], np.ndarray],
                  samples: int,
                  rng: RngHandle,
                  threads: int = 1) -> np.ndarray:
    """
    Draw `samples` values in BLOCKS blocks and concatenate them in order.

    `draw(count, stream)` returns a 1-D array of per-sample values.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    sizes = [len(chunk) for chunk in np.array_split(np.arange(samples), min(BLOCKS, samples))]
    results = WorkerPool(threads).map_ordered(
        lambda k: draw(sizes[k], rng.derive(k)), range(len(sizes))
    )
    return np.concatenate([np.asarray(r.unwrap(), dtype=float) for r in results])


# ---------------------------------------------------------------------------
# Scalar moments
# ---------------------------------------------------------------------------

def exp_det_moment(m: int, sigma: float, samples: int, rng: RngHandle,
                   threads: int = 1) -> ExperimentReport:
    """E|det A|² = σ^{2m}·m! for an m×m centered Gaussian."""
    if not 1 <= m <= 6:
        raise ValueError(f"m must be in [1, 6], got {m}")

    def draw(count, stream):
        stack = sample_gaussian_batch(count, m, m, stream, sigma=sigma)
        return np.abs(np.linalg.det(stack)) ** 2

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width = mean_ci(values)
    reference = sigma ** (2 * m) * math.factorial(m)
    return ExperimentReport(
        name="det_moment", n=m, samples=samples, estimate=estimate,
        half_width=half_width, reference=reference,
        tolerance=DET_MOMENT_TOLERANCE * reference, seed=rng,
        notes=f"sigma={sigma}",
    )


def adjugate_frobenius_sq(stack: np.ndarray) -> np.ndarray:
    """
    ‖A⁻¹‖_F²·|det A|² = Σ_j Π_{i≠j} σ_i² for every matrix in a stack.

    Evaluated from singular values without dividing, so singular
    samples are harmless.
    """
    squares = np.linalg.svd(stack, compute_uv=False) ** 2
    m = squares.shape[1]
    return sum(np.prod(np.delete(squares, j, axis=1), axis=1) for j in range(m))


def exp_inv_det_moment(m: int, samples: int, rng: RngHandle,
                       threads: int = 1) -> ExperimentReport:
    """E(‖A⁻¹‖_F²·|det A|²) = m!·m for an m×m standard Gaussian."""
    if not 1 <= m <= 5:
        raise ValueError(f"m must be in [1, 5], got {m}")

    def draw(count, stream):
        return adjugate_frobenius_sq(sample_gaussian_batch(count, m, m, stream))

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width, plain = median_of_means(values)
    reference = float(math.factorial(m) * m)
    return ExperimentReport(
        name="inv_det_moment", n=m, samples=samples, estimate=estimate,
        half_width=half_width, reference=reference,
        tolerance=INV_DET_MOMENT_TOLERANCE * reference, seed=rng,
        plain_mean=plain,
    )


def exp_pinv_moment(n: int, samples: int, rng: RngHandle,
                    threads: int = 1) -> ExperimentReport:
    """E‖M†‖_F² = n − 1 for an (n−1)×n standard Gaussian."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")

    def draw(count, stream):
        return batch_pinv_frobenius_sq(sample_gaussian_batch(count, n - 1, n, stream))

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width, plain = median_of_means(values)
    reference = float(n - 1)
    return ExperimentReport(
        name="pinv_moment", n=n, samples=samples, estimate=estimate,
        half_width=half_width, reference=reference,
        tolerance=PINV_MOMENT_TOLERANCE * reference, seed=rng,
        plain_mean=plain,
    )


def exp_truncation_mass(n: int, samples: int, rng: RngHandle,
                        threads: int = 1) -> ExperimentReport:
    """
    Mean draws of the truncated sampler at radius √2·n.

    P(‖A‖_F ≤ √2·n) ≥ 1/2 for a standard Gaussian, so at most two
    draws are needed on average.
    """
    radius = math.sqrt(2.0) * n

    def draw(count, stream):
        return np.array([
            sample_truncated_gaussian(n, radius, stream)[1] for _ in range(count)
        ], dtype=float)

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width = mean_ci(values)
    return ExperimentReport(
        name="truncation_mass", n=n, samples=samples, estimate=estimate,
        half_width=half_width, reference=2.0, kind=ReportKind.BOUND, seed=rng,
        notes=f"acceptance {1.0 / estimate:.4f}",
    )


# ---------------------------------------------------------------------------
# Coarea identity
# ---------------------------------------------------------------------------

def phi_one(A: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return np.ones(lam.shape)


def phi_gauss(A: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return np.exp(-np.abs(lam) ** 2)


COAREA_FUNCTIONS: Dict[str, CoareaFunction] = {
    "one": phi_one,
    "gauss": phi_gauss,
}


def triangular_stack(lam: np.ndarray, w: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Stack of [[λ, w*], [0, B]]."""
    count, k = w.shape
    A = np.zeros((count, k + 1, k + 1), dtype=complex)
    A[:, 0, 0] = lam
    A[:, 0, 1:] = w.conj()
    A[:, 1:, 1:] = B
    return A


def exp_coarea_identity(n: int, phi: str, samples: int, rng: RngHandle,
                        threads: int = 1) -> ExperimentReport:
    """
    Compare both sides of the eigenpair coarea identity.

    Left: E_A Σ_{eigenpairs} φ(A, λ). Right: (1/Γ(n))·E φ(A, λ)|det(B − λI)|²
    over A = [[λ, w*], [0, B]] with λ, w, B standard Gaussian. The two
    agree when their 95% intervals overlap.
    """
    if not 2 <= n <= 5:
        raise ValueError(f"n must be in [2, 5], got {n}")
    function = COAREA_FUNCTIONS[phi]

    def draw_left(count, stream):
        stack = sample_gaussian_batch(count, n, n, stream)
        eigenvalues = np.linalg.eigvals(stack)
        return sum(function(stack, eigenvalues[:, k]) for k in range(n))

    def draw_right(count, stream):
        lam = complex_gaussian(stream, count)
        w = complex_gaussian(stream, (count, n - 1))
        B = complex_gaussian(stream, (count, n - 1, n - 1))
        stack = triangular_stack(lam, w, B)
        e1 = np.eye(n, dtype=complex)[0]
        weight = np.array([
            coarea_weight(EigenTriple(A, complex(z), e1)).value for A, z in zip(stack, lam)
        ])
        return function(stack, lam) * weight / math.gamma(n)

    left, left_hw = mean_ci(sample_blocks(draw_left, samples, rng.derive(0), threads))
    right, right_hw = mean_ci(sample_blocks(draw_right, samples, rng.derive(1), threads))
    if phi == "one":
        left_hw = 0.0

    return ExperimentReport(
        name="coarea_identity", n=n, samples=samples, estimate=left,
        half_width=left_hw, reference=right, tolerance=left_hw + right_hw,
        seed=rng, notes=f"phi={phi} right_half_width={right_hw:.4g}",
    )


# ---------------------------------------------------------------------------
# Condition numbers
# ---------------------------------------------------------------------------

def mu_f_squared_terms(stack: np.ndarray) -> np.ndarray:
    """
    μ_F² of every eigenpair of every matrix in a stack.

    Returns:
        (count, n) array
    """
    count, n, _ = stack.shape
    values, vectors = batch_eigendecomposition(stack)
    norms_sq = np.sum(np.abs(stack) ** 2, axis=(1, 2))
    identity = np.eye(n, dtype=complex)

    terms = np.empty((count, n))
    for k in range(n):
        v = vectors[:, :, k]
        projector = identity - v[:, :, None] * v.conj()[:, None, :]
        shifted = values[:, k, None, None] * identity - stack
        pinv_sq = batch_pinv_frobenius_sq(projector @ shifted, rank=n - 1)
        terms[:, k] = np.maximum(1.0, norms_sq * pinv_sq)
    return terms


def exp_mu_average(n: int, sigma: float, center: Optional[ComplexMatrix],
                   samples: int, rng: RngHandle, threads: int = 1) -> ExperimentReport:
    """E[(1/n)Σ μ_F²/‖A‖_F²] ≤ n/σ² for a Gaussian centered anywhere."""
    if not 2 <= n <= 8:
        raise ValueError(f"n must be in [2, 8], got {n}")

    def draw(count, stream):
        stack = sample_gaussian_batch(count, n, n, stream, sigma=sigma, center=center)
        norms_sq = np.sum(np.abs(stack) ** 2, axis=(1, 2))
        return mu_f_squared_terms(stack).mean(axis=1) / norms_sq

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width, plain = median_of_means(values)
    centered = center is None or not np.any(center)
    return ExperimentReport(
        name="mu_average", n=n, samples=samples, estimate=estimate,
        half_width=half_width, reference=n / sigma ** 2, kind=ReportKind.BOUND,
        seed=rng, plain_mean=plain,
        notes=f"sigma={sigma} center={'0' if centered else 'given'}",
    )


def exp_mu_sphere(n: int, samples: int, rng: RngHandle, threads: int = 1) -> ExperimentReport:
    """E[(1/n)Σ μ_F²] ≤ n³ for A uniform on the unit Frobenius sphere."""
    if not 2 <= n <= 8:
        raise ValueError(f"n must be in [2, 8], got {n}")

    def draw(count, stream):
        stack = sample_gaussian_batch(count, n, n, stream)
        stack /= np.linalg.norm(stack, axis=(1, 2))[:, None, None]
        return mu_f_squared_terms(stack).mean(axis=1)

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width, plain = median_of_means(values)
    return ExperimentReport(
        name="mu_sphere", n=n, samples=samples, estimate=estimate,
        half_width=half_width, reference=float(n ** 3), kind=ReportKind.BOUND,
        seed=rng, plain_mean=plain,
    )


# ---------------------------------------------------------------------------
# Sphere geometry
# ---------------------------------------------------------------------------

def sphere_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Great-circle distance arccos Re⟨A, B⟩ between unit-norm stacks."""
    cosines = np.real(np.sum(A * B.conj(), axis=(1, 2)))
    return np.arccos(np.clip(cosines, -1.0, 1.0))


def exp_geodesic_constant(n: int, samples: int, rng: RngHandle,
                          threads: int = 1) -> ExperimentReport:
    """Mean distance between independent uniform points of the sphere is π/2."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")

    def draw(count, stream):
        A = sample_gaussian_batch(count, n, n, stream)
        B = sample_gaussian_batch(count, n, n, stream)
        A /= np.linalg.norm(A, axis=(1, 2))[:, None, None]
        B /= np.linalg.norm(B, axis=(1, 2))[:, None, None]
        return sphere_distances(A, B)

    values = sample_blocks(draw, samples, rng, threads)
    estimate, half_width = mean_ci(values)
    return ExperimentReport(
        name="geodesic_constant", n=n, samples=samples, estimate=estimate,
        half_width=half_width, reference=math.pi / 2.0,
        tolerance=GEODESIC_TOLERANCE, seed=rng,
    )


# ---------------------------------------------------------------------------
# Random start sampler
# ---------------------------------------------------------------------------

def determinant_ratio(B: ComplexMatrix, z: complex) -> float:
    """|det B|²/|det(B − zI)|²."""
    shifted = B - z * np.eye(B.shape[0], dtype=complex)
    return float(abs(np.linalg.det(B)) ** 2 / abs(np.linalg.det(shifted)) ** 2)


def exp_sn_cn_bounds(n: int, samples: int, rng: RngHandle,
                     threads: int = 1) -> List[ExperimentReport]:
    """
    Sampler constants: draws per accepted start (C_n ≤ 2) and the
    largest determinant ratio over accepted starts (≤ 2e).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")

    def draw(count, stream):
        rows = np.empty((count, 2))
        for i in range(count):
            start = phi_n(sample_omega(n, stream))
            rows[i, 0] = start.omega.draws
            rows[i, 1] = determinant_ratio(start.A0[1:, 1:], start.omega.z)
        return rows.ravel()

    rows = sample_blocks(draw, samples, rng, threads).reshape(-1, 2)
    draws, ratios = rows[:, 0], rows[:, 1]
    mean_draws, draws_hw = mean_ci(draws)

    return [
        ExperimentReport(
            name="sn_cn_acceptance", n=n, samples=samples, estimate=mean_draws,
            half_width=draws_hw, reference=2.0, kind=ReportKind.BOUND, seed=rng,
            notes=f"acceptance {samples / draws.sum():.4f}",
        ),
        ExperimentReport(
            name="sn_cn_det_ratio", n=n, samples=samples, estimate=float(ratios.max()),
            half_width=0.0, reference=2.0 * math.e, kind=ReportKind.BOUND, seed=rng,
            plain_mean=float(ratios.mean()),
        ),
    ]


# ---------------------------------------------------------------------------
# Hexagonal start
# ---------------------------------------------------------------------------

def hexagonal_growth_bound(n: int) -> float:
    """√3·π·n²/27."""
    return math.sqrt(3.0) * math.pi * n * n / 27.0


def exp_hexagonal_bound(n_max: int = 64) -> List[ExperimentReport]:
    """
    μ(A₀)² of the lattice start: exactly 6 at n = 7, and at most
    √3πn²/27 + 25 for every n ≤ n_max.
    """
    excess = max(
        hexagonal_start(n).mu_squared - hexagonal_growth_bound(n)
        for n in range(2, n_max + 1)
    )
    seven = hexagonal_start(7).mu_squared
    return [
        ExperimentReport(
            name="hexagonal_mu7", n=7, samples=1, estimate=seven, half_width=0.0,
            reference=6.0, tolerance=1e-9,
        ),
        ExperimentReport(
            name="hexagonal_bound", n=n_max, samples=n_max - 1, estimate=excess,
            half_width=0.0, reference=HEXAGONAL_SLACK, kind=ReportKind.BOUND,
            notes="max over n of mu^2 - sqrt(3)*pi*n^2/27",
        ),
    ]


# ---------------------------------------------------------------------------
# Newton convergence
# ---------------------------------------------------------------------------

def perturb_vector(t: EigenTriple, distance: float, rng: RngHandle) -> EigenTriple:
    """Rotate v by `distance` radians toward a random direction of v⊥."""
    u = complex_gaussian(rng, t.n)
    u -= t.v * np.vdot(t.v, u)
    u /= np.linalg.norm(u)
    v = math.cos(distance) * t.v + math.sin(distance) * u
    return EigenTriple(t.A, t.lam, v / np.linalg.norm(v))


def newton_decay_holds(distances: Sequence[float], floor: float = NEWTON_FLOOR) -> bool:
    """d_{k+1} ≤ max(2·d_k², floor) for every consecutive pair."""
    return all(
        later <= max(2.0 * earlier ** 2, floor)
        for earlier, later in zip(distances, distances[1:])
    )


def _newton_trial(n: int, stream: RngHandle, steps: int = 3) -> bool:
    A = sample_gaussian_matrix(n, n, rng=stream)
    A /= np.linalg.norm(A)
    lam, v = reference_eigendecomposition(A)[0]
    exact = EigenTriple.from_pair(A, lam, v)
    mu_exact = mu(exact)
    start = perturb_vector(exact, StepConstants().c0 / (8.0 * mu_exact), stream)
    distances = [dP2(start, exact)]
    distances += [dP2(t, exact) for t in newton_iterates(start, steps)]
    return newton_decay_holds(distances)


def exp_newton_convergence(n: int, trials: int, rng: RngHandle,
                           threads: int = 1) -> ExperimentReport:
    """Quadratic Newton decay from c₀/(8μ) around oracle eigenpairs."""
    results = WorkerPool(threads).map_ordered(
        lambda k: _newton_trial(n, rng.derive(k)), range(trials)
    )
    failures = sum(1 for r in results if not (r.success and r.data))
    return ExperimentReport(
        name="newton_convergence", n=n, samples=trials, estimate=float(failures),
        half_width=0.0, reference=0.0, kind=ReportKind.BOUND, seed=rng,
    )


# ---------------------------------------------------------------------------
# Local Lipschitz behaviour of mu
# ---------------------------------------------------------------------------

def _lipschitz_trial(n: int, stream: RngHandle) -> bool:
    A0 = sample_gaussian_matrix(n, n, rng=stream)
    A0 /= np.linalg.norm(A0)
    lam, v = reference_eigendecomposition(A0)[0]
    base = EigenTriple.from_pair(A0, lam, v)
    direction = sample_gaussian_matrix(n, n, rng=stream)
    direction /= np.linalg.norm(direction)
    fraction = float(stream.generator.uniform(0.5, 0.99))
    A = A0 + fraction * LIPSCHITZ_RADIUS / mu(base) ** 2 * direction
    return mu_lipschitz_bound(base, A)


def exp_mu_lipschitz(n: int, trials: int, rng: RngHandle,
                     threads: int = 1) -> ExperimentReport:
    """Count pairs whose μ grows past 3/2·μ₀ inside the c·‖A₀‖/μ₀² ball."""
    results = WorkerPool(threads).map_ordered(
        lambda k: _lipschitz_trial(n, rng.derive(k)), range(trials)
    )
    failures = sum(1 for r in results if not (r.success and r.data))
    return ExperimentReport(
        name="mu_lipschitz", n=n, samples=trials, estimate=float(failures),
        half_width=0.0, reference=0.0, kind=ReportKind.BOUND, seed=rng,
    )


# ---------------------------------------------------------------------------
# Step bound and solver conformance
# ---------------------------------------------------------------------------

def continued_mu_integral(path: GreatCirclePath,
                          start_pair: Tuple[complex, np.ndarray],
                          nodes: Sequence[float]) -> float:
    """
    ∫ μ(B_t, λ_t, v_t)² dt along the exact eigenpair continued from start_pair.

    At each node the reference eigenpair nearest (in dP2) to the
    previous one is taken; the integral uses the trapezoid rule.
    """
    lam, v = start_pair
    current = EigenTriple.from_pair(path.start, lam, v)
    squares = []
    for t in nodes:
        B = path.point(t)
        candidates = [EigenTriple.from_pair(B, l, w) for l, w in reference_eigendecomposition(B)]
        index, _ = nearest_pair(current.with_matrix(B), candidates)
        current = candidates[index]
        squares.append(mu(current) ** 2)
    return float(trapezoid(squares, nodes))


def step_bound_holds(steps: int, integral: float) -> bool:
    """
    steps ≤ 1000·∫μ² dt, not counting the final step clamped at t = a.
    """
    return steps <= STEP_BOUND_FACTOR * integral + 1


def _solve_trial(algo: str, n: int, stream: RngHandle, budget: SolverBudget) -> SolveOutput:
    A = sample_gaussian_matrix(n, n, rng=stream.derive(0))
    if algo == "a":
        return algorithm_a(A, budget)
    return algorithm_b(A, stream.derive(1), budget)


def path_step_bounds(output: SolveOutput, A: ComplexMatrix) -> List[bool]:
    """Step-bound verdict for every traced, successful path of a solve."""
    verdicts = []
    path = connect(output.start.A0, A)
    scale = np.linalg.norm(output.start.A0)
    for outcome in output.outcomes:
        if not outcome.succeeded or outcome.trace is None:
            continue
        lam, v = output.start.pairs[outcome.index]
        nodes = [record.t for record in outcome.trace] + [path.arc_length]
        integral = continued_mu_integral(path, (lam / scale, v), nodes)
        verdicts.append(step_bound_holds(outcome.steps, integral))
    return verdicts


def _conformance_trial(algo: str, n: int, stream: RngHandle,
                       budget: SolverBudget) -> Dict[str, object]:
    A = sample_gaussian_matrix(n, n, rng=stream.derive(0))
    output = _solve_trial(algo, n, stream, budget)
    result = {"solved": output.all_succeeded(), "matched": False, "bounds": []}
    if not result["solved"]:
        return result

    oracle = reference_eigendecomposition(A)
    if algo == "a":
        distance = matching_distance([p.lam for p in output.pairs], [lam for lam, _ in oracle])
        result["matched"] = distance <= 1e-8
    else:
        exact = [EigenTriple.from_pair(A, lam, v) for lam, v in oracle]
        index, distance = nearest_pair(output.pairs[0], exact)
        result["matched"] = distance <= StepConstants().c0 / (4.0 * mu(exact[index]))

    result["bounds"] = path_step_bounds(output, A)
    return result


def exp_solver_conformance(algo: str, n: int, trials: int, rng: RngHandle,
                           budget: Optional[SolverBudget] = None,
                           threads: int = 1) -> List[ExperimentReport]:
    """
    Solver correctness against the oracle plus the per-path step bound.

    Algorithm a must succeed on every trial; algorithm b on at least
    99% of them. Step-bound violations are never allowed.
    """
    budget = dataclasses.replace(budget or SolverBudget(), trace=True, threads=1)
    results = WorkerPool(threads).map_ordered(
        lambda k: _conformance_trial(algo, n, rng.derive(k), budget), range(trials)
    )

    failures = 0
    violations = 0
    checked = 0
    for r in results:
        if not r.success:
            logger.warning(f"Conformance trial raised: {r.error}")
            failures += 1
            continue
        trial = r.data
        if not (trial["solved"] and trial["matched"]):
            failures += 1
        checked += len(trial["bounds"])
        violations += sum(1 for ok in trial["bounds"] if not ok)

    allowed = 0.0 if algo == "a" else 0.01
    return [
        ExperimentReport(
            name=f"solver_{algo}", n=n, samples=trials, estimate=failures / trials,
            half_width=0.0, reference=allowed, kind=ReportKind.BOUND, seed=rng,
            notes=f"{failures} failed",
        ),
        ExperimentReport(
            name=f"step_bound_{algo}", n=n, samples=checked, estimate=float(violations),
            half_width=0.0, reference=0.0, kind=ReportKind.BOUND, seed=rng,
            notes=f"{checked} paths checked",
        ),
    ]


# ---------------------------------------------------------------------------
# Step scaling
# ---------------------------------------------------------------------------

def _steps_trial(algo: str, n: int, stream: RngHandle, budget: SolverBudget) -> Optional[int]:
    output = _solve_trial(algo, n, stream, budget)
    if not output.all_succeeded():
        return None
    return output.total_steps


def exp_step_scaling(algo: str, n_list: Sequence[int], trials: int, rng: RngHandle,
                     budget: Optional[SolverBudget] = None,
                     threads: int = 1) -> List[ExperimentReport]:
    """
    Mean homotopy steps per solve for each n, plus the log-log slope.

    All reports are informational. Failed solves are excluded from the
    means and counted in the notes.
    """
    budget = dataclasses.replace(budget or SolverBudget(), threads=1)
    pool = WorkerPool(threads)
    reports = []
    means = []

    for n in n_list:
        stream = rng.derive(n)
        results = pool.map_ordered(
            lambda k: _steps_trial(algo, n, stream.derive(k), budget), range(trials)
        )
        steps = np.array([r.data for r in results if r.success and r.data is not None], dtype=float)
        failed = trials - steps.size
        mean, half_width = mean_ci(steps) if steps.size else (math.nan, math.nan)
        means.append(mean)
        reports.append(ExperimentReport(
            name=f"step_scaling_{algo}", n=n, samples=int(steps.size), estimate=mean,
            half_width=half_width, reference=math.nan, kind=ReportKind.INFORMATIONAL,
            seed=rng, notes=f"{failed} failed",
        ))
        logger.info(f"step scaling {algo}: n={n} mean steps {mean:.1f} ({failed} failed)")

    reports.append(ExperimentReport(
        name=f"step_scaling_{algo}_slope", n=max(n_list), samples=trials,
        estimate=log_log_slope(n_list, means), half_width=math.nan, reference=math.nan,
        kind=ReportKind.INFORMATIONAL, seed=rng,
        notes="slope of log(mean steps) against log(n)",
    ))
    return reports


def log_log_slope(n_list: Sequence[int], means: Sequence[float]) -> float:
    x = np.log(np.asarray(n_list, dtype=float))
    y = np.asarray(means, dtype=float)
    usable = np.isfinite(y) & (y > 0)
    if np.count_nonzero(usable) < 2:
        return math.nan
    return float(np.polyfit(x[usable], np.log(y[usable]), 1)[0])


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

Runner = Callable[[RngHandle, Optional[int], Optional[int], int, SolverBudget], List[ExperimentReport]]


def _run_det(rng, samples, trials, threads, budget):
    return [exp_det_moment(m, 1.0, samples or 10 ** 5, rng.derive(m), threads) for m in (2, 3)]


def _run_inv_det(rng, samples, trials, threads, budget):
    return [exp_inv_det_moment(m, samples or 10 ** 5, rng.derive(m), threads) for m in (2, 3)]


def _run_pinv(rng, samples, trials, threads, budget):
    return [exp_pinv_moment(n, samples or 10 ** 5, rng.derive(n), threads) for n in (2, 3, 5)]


def _run_coarea(rng, samples, trials, threads, budget):
    return [
        exp_coarea_identity(n, phi, samples or 10 ** 5, rng.derive(10 * n + i), threads)
        for n in (2, 3)
        for i, phi in enumerate(("one", "gauss"))
    ]


def _run_geodesic(rng, samples, trials, threads, budget):
    return [exp_geodesic_constant(n, samples or 10 ** 5, rng.derive(n), threads) for n in (2, 4)]


def _run_mu_average(rng, samples, trials, threads, budget):
    reports = []
    for n in range(2, 7):
        for sigma in (1.0, 2.0):
            for centered in (True, False):
                center = None if centered else np.eye(n, dtype=complex)
                stream = rng.derive(100 * n + 10 * int(sigma) + int(centered))
                reports.append(exp_mu_average(n, sigma, center, samples or 10 ** 4, stream, threads))
    return reports


def _run_mu_sphere(rng, samples, trials, threads, budget):
    return [exp_mu_sphere(n, samples or 10 ** 4, rng.derive(n), threads) for n in range(2, 7)]


def _run_sn_cn(rng, samples, trials, threads, budget):
    reports = []
    for n in range(2, 7):
        reports.extend(exp_sn_cn_bounds(n, samples or 10 ** 4, rng.derive(n), threads))
    return reports


def _run_truncation(rng, samples, trials, threads, budget):
    return [exp_truncation_mass(n, samples or 10 ** 4, rng.derive(n), threads) for n in (2, 3, 4)]


def _run_hexagonal(rng, samples, trials, threads, budget):
    return exp_hexagonal_bound(64)


def _run_newton(rng, samples, trials, threads, budget):
    return [exp_newton_convergence(5, trials or 50, rng, threads)]


def _run_solver(rng, samples, trials, threads, budget):
    reports = []
    for n in range(2, 7):
        reports.extend(exp_solver_conformance("a", n, trials or 100, rng.derive(n), budget, threads))
    reports.extend(exp_solver_conformance("b", 4, trials or 500, rng.derive(100), budget, threads))
    return reports


def _run_lipschitz(rng, samples, trials, threads, budget):
    return [exp_mu_lipschitz(n, trials or 50, rng.derive(n), threads) for n in (3, 5)]


# Registry order fixes each experiment's stream: rng.derive(position)
SUITE: Dict[str, Runner] = {
    "det_moment": _run_det,
    "inv_det_moment": _run_inv_det,
    "pinv_moment": _run_pinv,
    "coarea_identity": _run_coarea,
    "geodesic_constant": _run_geodesic,
    "mu_average": _run_mu_average,
    "mu_sphere": _run_mu_sphere,
    "sn_cn_bounds": _run_sn_cn,
    "truncation_mass": _run_truncation,
    "hexagonal_bound": _run_hexagonal,
    "newton_convergence": _run_newton,
    "solver_conformance": _run_solver,
    "mu_lipschitz": _run_lipschitz,
}


def run_suite(rng: RngHandle,
              names: Optional[Sequence[str]] = None,
              samples: Optional[int] = None,
              trials: Optional[int] = None,
              threads: int = 1,
              budget: Optional[SolverBudget] = None,
              on_report: Optional[Callable[[ExperimentReport], None]] = None) -> List[ExperimentReport]:
    """
    Run the named experiments (all when `names` is empty).

    Raises:
        KeyError: On an unknown experiment name
    """
    budget = budget or SolverBudget()
    selected = list(names) if names else list(SUITE)
    unknown = [name for name in selected if name not in SUITE]
    if unknown:
        raise KeyError(f"Unknown experiments: {', '.join(unknown)}")

    reports: List[ExperimentReport] = []
    for position, name in enumerate(SUITE):
        if name not in selected:
            continue
        logger.info(f"Running experiment {name}")
        try:
            batch = SUITE[name](rng.derive(position), samples, trials, threads, budget)
        except EigenflowError as e:
            logger.error(f"Experiment {name} aborted: {e}")
            batch = [ExperimentReport(
                name=name, n=0, samples=0, estimate=math.nan, half_width=math.nan,
                reference=math.nan, seed=rng, notes=f"aborted: {e}",
            )]
        for report in batch:
            logger.info(f"{report.name} n={report.n}: {report.estimate:.6g} vs "
                        f"{report.reference:.6g} -> {report.verdict.value}")
            if on_report:
                on_report(report)
        reports.extend(batch)
    return reports
