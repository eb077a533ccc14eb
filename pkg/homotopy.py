"""
Great-circle homotopy and the certified path tracker.

The tracker follows one eigenpair of B_t from t = 0 to t = a with
steps of length b = C_ε/(3√2(1+ε)μ²), applying a single projective
Newton step at every node:

    1. μ ← μ(B_t, λ, v)
    2. b ← step_size(μ)
    3. t ← min(t + b, a)
    4. (λ, v) ← N_{B_t}(λ, v)

Failures surface as exceptions; the solvers turn them into
per-path outcomes.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core_linalg import EPS, frobenius_inner
from eigen_geometry import mu, newton_step
from models import (
    BudgetExceededError,
    ComplexMatrix,
    DegeneratePathError,
    DimensionError,
    DomainError,
    EigenTriple,
    GreatCirclePath,
    IllPosedError,
    PathIllPosedError,
    Refinement,
    StepConstants,
    StepRecord,
    TrackerState,
    TrackResult,
)


logger = logging.getLogger("eigenflow.homotopy")

DEFAULT_MAX_STEPS = 10 ** 6

# Endpoints closer than this (in sin a) count as one class
_DEGENERATE_SIN = 64 * EPS


def build_path(A0: ComplexMatrix, A: ComplexMatrix) -> GreatCirclePath:
    """
    Great circle on the unit Frobenius sphere from A₀/‖A₀‖_F to A/‖A‖_F.

    Raises:
        DimensionError: If the shapes differ
        DomainError: If either matrix is zero
        DegeneratePathError: If the normalized endpoints coincide or are antipodal
    """
    A0 = np.asarray(A0, dtype=complex)
    A = np.asarray(A, dtype=complex)
    if A0.shape != A.shape:
        raise DimensionError(f"Endpoint shapes differ: {A0.shape} vs {A.shape}")

    norm0 = np.linalg.norm(A0)
    norm1 = np.linalg.norm(A)
    if norm0 == 0.0 or norm1 == 0.0:
        raise DomainError("Path endpoints must be nonzero")

    start = A0 / norm0
    target = A / norm1
    cos_a = frobenius_inner(target, start).real
    orthogonal = target - cos_a * start
    sin_a = float(np.linalg.norm(orthogonal))

    if sin_a <= _DEGENERATE_SIN:
        kind = "identical" if cos_a > 0.0 else "antipodal"
        raise DegeneratePathError(f"Endpoints are {kind} on the sphere")

    return GreatCirclePath(
        start=start,
        direction=orthogonal / sin_a,
        arc_length=math.atan2(sin_a, cos_a),
    )


def connect(A0: ComplexMatrix, A: ComplexMatrix) -> GreatCirclePath:
    """
    build_path, except that a positive multiple of A₀ yields the
    zero-length path instead of an error.
    """
    try:
        return build_path(A0, A)
    except DegeneratePathError:
        if frobenius_inner(np.asarray(A, dtype=complex), np.asarray(A0, dtype=complex)).real > 0.0:
            return GreatCirclePath.constant(A0)
        raise


def step_size(mu_now: float, constants: StepConstants = StepConstants()) -> float:
    """
    Step length at the 1/3 coefficient of the admissible window.

    Raises:
        IllPosedError: If mu_now is infinite or NaN
    """
    if not math.isfinite(mu_now):
        raise IllPosedError("Condition number is infinite")
    if mu_now < 1.0:
        raise ValueError(f"Condition number must be >= 1, got {mu_now}")
    return constants.c_eps / (
        3.0 * math.sqrt(2.0) * (1.0 + constants.eps) * mu_now * mu_now
    )


class PathTracker:
    """
    Certified predictor-corrector tracker for one homotopy path.

    One instance may track many paths sequentially; it is not shared
    between threads.
    """

    def __init__(self,
                 constants: StepConstants = StepConstants(),
                 max_steps: int = DEFAULT_MAX_STEPS,
                 record_trace: bool = False,
                 progress_callback: Optional[Callable[[float, float, int], None]] = None):
        """
        Initialize tracker.

        Args:
            constants: Step-size constants
            max_steps: Step budget per path
            record_trace: Keep a StepRecord per step
            progress_callback: Optional callback(t, arc_length, steps)
        """
        if max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {max_steps}")
        self.constants = constants
        self.max_steps = max_steps
        self.record_trace = record_trace
        self.progress_callback = progress_callback
        self.state: Optional[TrackerState] = None

    def track(self, path: GreatCirclePath,
              start_pair: Tuple[complex, np.ndarray]) -> TrackResult:
        """
        Follow the eigenpair starting at `start_pair` on B_0 to B_a.

        Args:
            path: Great-circle path
            start_pair: (λ₀, v₀), an approximate eigenpair of path.start

        Returns:
            TrackResult with the final triple on B_a

        Raises:
            PathIllPosedError: If μ is infinite at a node
            BudgetExceededError: If more than max_steps steps are needed
        """
        lam0, v0 = start_pair
        self.state = TrackerState(
            t=0.0,
            current=EigenTriple.from_pair(path.start, lam0, v0),
            trace=[] if self.record_trace else None,
        )
        a = path.arc_length

        while self.state.t < a:
            if self.state.steps >= self.max_steps:
                raise BudgetExceededError(
                    f"Step budget {self.max_steps} exhausted at t={self.state.t:.6g} of {a:.6g}",
                    steps=self.state.steps,
                    t=self.state.t,
                )
            self._advance(path)

        logger.info(f"Path tracked: a={a:.6g}, steps={self.state.steps}")
        return TrackResult(self.state.current, self.state.steps, self.state.trace)

    def _advance(self, path: GreatCirclePath) -> None:
        state = self.state
        mu_now = mu(state.current)
        if not math.isfinite(mu_now):
            raise PathIllPosedError(f"Infinite condition number at t={state.t:.6g}")

        b = step_size(mu_now, self.constants)
        t_next = min(state.t + b, path.arc_length)
        moved = state.current.with_matrix(path.point(t_next))

        try:
            state.current = newton_step(moved)
        except IllPosedError as e:
            raise PathIllPosedError(f"Newton step failed at t={t_next:.6g}: {e}")

        if state.trace is not None:
            state.trace.append(StepRecord(t=state.t, b=b, mu=mu_now))
        state.t = t_next
        state.steps += 1

        logger.debug(f"step {state.steps}: t={state.t:.6g} b={b:.3e} mu={mu_now:.4g}")
        if self.progress_callback:
            self.progress_callback(state.t, path.arc_length, state.steps)


def track(path: GreatCirclePath,
          start_pair: Tuple[complex, np.ndarray],
          constants: StepConstants = StepConstants(),
          max_steps: int = DEFAULT_MAX_STEPS,
          trace: bool = False) -> TrackResult:
    """Track one path with a fresh PathTracker."""
    return PathTracker(constants, max_steps, trace).track(path, start_pair)


def rescale_to_input(t: EigenTriple, A: ComplexMatrix) -> EigenTriple:
    """Move a pair on A/‖A‖_F to A: (λ·‖A‖_F, v)."""
    A = np.asarray(A, dtype=complex)
    return EigenTriple(A, complex(t.lam * np.linalg.norm(A)), t.v)


def residual_decay_holds(residuals: Sequence[float], floor: float) -> bool:
    """ρ_k ≤ max(floor, 2^{1−2^k}·ρ_0) for every k ≥ 1, checked until ρ reaches the floor."""
    for k in range(1, len(residuals)):
        if residuals[k - 1] <= floor:
            break
        if residuals[k] > max(floor, 2.0 ** (1 - 2 ** k) * residuals[0]):
            return False
    return True


def refine_and_certify(t: EigenTriple, steps: int = 3,
                       tolerance: float = 1e-12) -> Refinement:
    """
    Certify by refinement: apply Newton steps and check the residuals.

    The triple passes when the residuals shrink like 2^{1−2^k} until
    they reach tolerance·‖A‖_F and the final residual is within that
    floor.

    Raises:
        IllPosedError: If a Newton step meets a singular operator
    """
    residuals: List[float] = [t.residual()]
    current = t
    for _ in range(steps):
        current = newton_step(current)
        residuals.append(current.residual())

    floor = tolerance * max(float(np.linalg.norm(t.A)), np.finfo(float).tiny)
    certified = residuals[-1] <= floor and residual_decay_holds(residuals, floor)
    if not certified:
        logger.warning(
            f"Refinement residuals {', '.join(f'{r:.3e}' for r in residuals)} "
            f"do not settle under {tolerance:.0e}*|A|_F"
        )
    return Refinement(current, residuals, certified)
