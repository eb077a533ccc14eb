"""
Core data models for the eigenflow solver.

Typed structures shared by the kernel, the geometry, the tracker,
the solvers and the experiment harness, plus the exception hierarchy.
Matrices and vectors are numpy complex128 arrays.
"""

from dataclasses import dataclass, field
from typing import Optional, List, Tuple
from enum import Enum
import math

import numpy as np


ComplexMatrix = np.ndarray

_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class EigenflowError(Exception):
    """Base exception for eigenflow errors."""
    pass


class DimensionError(EigenflowError):
    """Shape mismatch or size below an operation's minimum."""
    pass


class RankError(EigenflowError):
    """Rank-deficient input to a factorization that needs full rank."""
    pass


class NumericalError(EigenflowError):
    """Iteration cap reached or non-finite data met."""
    pass


class OracleError(NumericalError):
    """Reference eigendecomposition failed."""
    pass


class DomainError(EigenflowError):
    """Argument outside the domain of a projective quantity."""
    pass


class IllPosedError(EigenflowError):
    """Singular restricted operator or infinite condition number."""
    pass


class PathIllPosedError(IllPosedError):
    """Condition number became infinite at a tracker node."""
    pass


class ContractError(EigenflowError):
    """A predicate was evaluated outside its precondition."""
    pass


class DegeneratePathError(EigenflowError):
    """Great-circle endpoints are in the same or antipodal class."""
    pass


class BudgetExceededError(EigenflowError):
    """Tracker used more than the allowed number of steps."""

    def __init__(self, message: str, steps: int = 0, t: float = 0.0):
        super().__init__(message)
        self.steps = steps
        self.t = t


class InputError(EigenflowError):
    """Unreadable or malformed input file."""
    pass


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------

class PathStatus(Enum):
    """Outcome of one homotopy path."""
    PENDING = "pending"
    TRACKED = "tracked"
    ILL_POSED = "ill_posed"
    BUDGET_EXCEEDED = "budget_exceeded"
    COINCIDENT = "coincident"


class Verdict(Enum):
    """Experiment verdict."""
    PASS = "pass"
    FAIL = "fail"
    INFO = "info"


class ReportKind(Enum):
    """How an experiment's estimate is compared with its reference."""
    EQUALITY = "equality"
    BOUND = "bound"
    INFORMATIONAL = "informational"


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------

def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass
class RngHandle:
    """
    Reproducible random stream identified by (seed, stream_id).

    The handle owns a numpy Generator; draws advance it. Two handles
    built from the same pair produce the same sample sequence.
    """
    seed: int
    stream_id: int = 0
    _generator: Optional[np.random.Generator] = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id,)
        )
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def derive(self, index: int) -> "RngHandle":
        """Independent child stream, stable under any scheduling order."""
        child = _splitmix64(_splitmix64(self.stream_id) ^ (index & _MASK64))
        return RngHandle(self.seed, child)


# ---------------------------------------------------------------------------
# Linear algebra results
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SvdResult:
    """Singular values in descending order with optional bases."""
    singular_values: np.ndarray
    u: Optional[np.ndarray] = None
    vh: Optional[np.ndarray] = None

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1]) if self.singular_values.size else 0.0


# ---------------------------------------------------------------------------
# Solution-variety geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenTriple:
    """
    A matrix with a candidate eigenvalue and unit eigenvector.

    The vector is a representative of a projective point; it must
    have unit norm. Use `from_pair` to normalize on construction.
    """
    A: ComplexMatrix
    lam: complex
    v: np.ndarray

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise DimensionError(f"Matrix must be square, got {self.A.shape}")
        if self.v.shape != (self.A.shape[0],):
            raise DimensionError(
                f"Vector length {self.v.shape} does not match n={self.A.shape[0]}"
            )
        norm = float(np.linalg.norm(self.v))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"Eigenvector must have unit norm, got {norm}")

    @classmethod
    def from_pair(cls, A: ComplexMatrix, lam: complex, v: np.ndarray) -> "EigenTriple":
        A = np.asarray(A, dtype=complex)
        v = np.asarray(v, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise DomainError("Eigenvector cannot be zero")
        return cls(A, complex(lam), v / norm)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def residual(self) -> float:
        """‖(λI − A)v‖."""
        return float(np.linalg.norm(self.lam * self.v - self.A @ self.v))

    def with_matrix(self, A: ComplexMatrix) -> "EigenTriple":
        return EigenTriple(np.asarray(A, dtype=complex), self.lam, self.v)


@dataclass(frozen=True)
class ConditionReport:
    """Operator-norm and Frobenius-norm condition numbers."""
    mu: float
    mu_f: float

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.mu) and math.isfinite(self.mu_f)


# ---------------------------------------------------------------------------
# Homotopy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepConstants:
    """Step-size constants of the certified tracker."""
    eps: float = 1.0 / 16.0
    c0: float = 0.0739
    alpha: float = 2.0 * math.sqrt(2.0) * (1.0 + math.sqrt(5.0))

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.5:
            raise ValueError(f"eps must be in (0, 1/2], got {self.eps}")

    @property
    def c_eps(self) -> float:
        return math.atan(
            self.eps / (math.sqrt(2.0) + self.alpha * (1.0 + self.eps))
        ) / (1.0 + self.eps)

    def window(self, mu: float) -> Tuple[float, float]:
        """Admissible step interval for condition number `mu`."""
        base = self.c_eps / (math.sqrt(2.0) * (1.0 + self.eps) * mu * mu)
        return base / 6.0, base / 2.0


@dataclass(frozen=True, eq=False)
class GreatCirclePath:
    """
    Arc-length parametrized great circle on the unit Frobenius sphere.

    B_t = start·cos t + direction·sin t for t in [0, arc_length].
    """
    start: ComplexMatrix
    direction: ComplexMatrix
    arc_length: float

    @classmethod
    def constant(cls, A0: ComplexMatrix) -> "GreatCirclePath":
        """Zero-length path sitting at A0/‖A0‖_F."""
        A0 = np.asarray(A0, dtype=complex)
        return cls(A0 / np.linalg.norm(A0), np.zeros_like(A0), 0.0)

    def point(self, t: float) -> ComplexMatrix:
        if t <= 0.0 or self.arc_length == 0.0:
            return self.start
        return self.start * math.cos(t) + self.direction * math.sin(t)

    @property
    def end(self) -> ComplexMatrix:
        return self.point(self.arc_length)

    def point_at_segment(self, s: float) -> float:
        """
        Arc parameter of the normalized point (1−s)B_0 + sB_a.

        Straight segments between the endpoints and the great circle
        visit the same normalized matrices.
        """
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"Segment parameter must be in [0, 1], got {s}")
        a = self.arc_length
        if a == 0.0:
            return 0.0
        # angle from B_0 of (1-s)B_0 + sB_a in the plane of the circle
        return math.atan2(s * math.sin(a), (1.0 - s) + s * math.cos(a))


@dataclass(frozen=True)
class StepRecord:
    """One accepted homotopy step."""
    t: float
    b: float
    mu: float

    def to_dict(self) -> dict:
        return {"t": self.t, "b": self.b, "mu": self.mu}


@dataclass(frozen=True)
class SolverBudget:
    """Tracker configuration handed to the solvers."""
    constants: StepConstants = field(default_factory=StepConstants)
    max_steps: int = 10 ** 6
    trace: bool = False
    threads: int = 1


@dataclass
class TrackerState:
    """Mutable state of one path tracker."""
    t: float
    current: EigenTriple
    steps: int = 0
    trace: Optional[List[StepRecord]] = None


@dataclass(frozen=True, eq=False)
class TrackResult:
    """Final approximate pair on B_a plus step accounting."""
    final: EigenTriple
    steps: int
    trace: Optional[List[StepRecord]] = None


@dataclass(frozen=True, eq=False)
class Refinement:
    """Newton-refined triple with its residual history ‖(λI − A)v‖."""
    triple: EigenTriple
    residuals: List[float]
    certified: bool


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OmegaSample:
    """Accepted draw from the random start space."""
    z: complex
    M: ComplexMatrix
    U: ComplexMatrix
    w: np.ndarray
    rejections: int

    @property
    def n(self) -> int:
        return self.M.shape[1]

    @property
    def draws(self) -> int:
        """Number of (z, M) rounds including the accepted one."""
        return self.rejections + 1


@dataclass(frozen=True, eq=False)
class StartSystem:
    """Start matrix with its known eigenpairs."""
    A0: ComplexMatrix
    pairs: List[Tuple[complex, np.ndarray]]
    mu_squared: Optional[float] = None
    omega: Optional[OmegaSample] = None


@dataclass
class PathOutcome:
    """Result of one path inside a solve."""
    index: int
    status: PathStatus = PathStatus.PENDING
    triple: Optional[EigenTriple] = None
    steps: int = 0
    mu: float = math.inf
    residuals: List[float] = field(default_factory=list)
    certified: bool = False
    trace: Optional[List[StepRecord]] = None
    error_message: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.status == PathStatus.TRACKED and self.certified


@dataclass
class SolveOutput:
    """Certified eigenpairs of the input matrix plus run metadata."""
    pairs: List[EigenTriple]
    steps_per_path: List[int]
    wall_time_ms: float
    seed: Optional[RngHandle] = None
    algorithm: str = "a"
    outcomes: List[PathOutcome] = field(default_factory=list)
    rejections: Optional[int] = None
    start: Optional[StartSystem] = None

    @property
    def failed_paths(self) -> List[int]:
        return [o.index for o in self.outcomes if not o.succeeded]

    @property
    def total_steps(self) -> int:
        return sum(self.steps_per_path)

    def all_succeeded(self) -> bool:
        return bool(self.outcomes) and not self.failed_paths


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    """
    Named Monte Carlo estimate compared with a reference value or bound.

    Equality reports pass when |estimate − reference| ≤ tolerance;
    bound reports pass when estimate ≤ reference + half_width.
    """
    name: str
    n: int
    samples: int
    estimate: float
    half_width: float
    reference: float
    kind: ReportKind = ReportKind.EQUALITY
    tolerance: float = 0.0
    seed: Optional[RngHandle] = None
    plain_mean: Optional[float] = None
    notes: str = ""
    verdict: Verdict = field(init=False)

    def __post_init__(self):
        self.verdict = self._judge()

    def _judge(self) -> Verdict:
        if self.kind == ReportKind.INFORMATIONAL:
            return Verdict.INFO
        if not math.isfinite(self.estimate):
            return Verdict.FAIL
        if self.kind == ReportKind.EQUALITY:
            ok = abs(self.estimate - self.reference) <= self.tolerance
        else:
            ok = self.estimate <= self.reference + self.half_width
        return Verdict.PASS if ok else Verdict.FAIL

    @property
    def passed(self) -> bool:
        return self.verdict != Verdict.FAIL


@dataclass(frozen=True)
class CoareaWeight:
    """|det(B − λI)|² weight of the triangular parametrization."""
    value: float

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError(f"Coarea weight must be nonnegative, got {self.value}")


@dataclass
class ValidationResult:
    """Result of input or configuration validation."""
    is_valid: bool
    error_message: Optional[str] = None
    warnings: List[str] = field(default_factory=list)
