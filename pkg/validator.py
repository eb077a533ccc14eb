"""
Input matrix and run configuration validation.

Validators return a ValidationResult instead of raising so the CLI can
report every problem with one message; `require_*` helpers raise the
typed errors the numerical modules expect.
"""

import math
from typing import Iterable, Optional, Set

import numpy as np

from models import ComplexMatrix, DimensionError, NumericalError, ValidationResult


class MatrixValidator:
    """
    Validates input matrices before a solve.
    """

    MIN_SIZE = 2

    # Beyond this the dense tracker is impractically slow
    LARGE_SIZE = 64

    @staticmethod
    def validate(A) -> ValidationResult:
        """
        Check that A is a finite square complex matrix with n ≥ 2.

        Returns:
            ValidationResult with any issues
        """
        warnings = []

        try:
            A = np.asarray(A, dtype=complex)
        except (TypeError, ValueError) as e:
            return ValidationResult(
                is_valid=False,
                error_message=f"Not a numeric matrix: {e}"
            )

        if A.ndim != 2:
            return ValidationResult(
                is_valid=False,
                error_message=f"Expected a 2-D matrix, got {A.ndim} dimensions"
            )

        rows, cols = A.shape
        if rows != cols:
            return ValidationResult(
                is_valid=False,
                error_message=f"matrix must be square (got {rows}x{cols})"
            )

        if rows < MatrixValidator.MIN_SIZE:
            return ValidationResult(
                is_valid=False,
                error_message=f"matrix must be at least {MatrixValidator.MIN_SIZE}x{MatrixValidator.MIN_SIZE}"
            )

        if not np.all(np.isfinite(A)):
            return ValidationResult(
                is_valid=False,
                error_message="matrix has non-finite entries"
            )

        if not np.any(A):
            return ValidationResult(
                is_valid=False,
                error_message="matrix is zero"
            )

        if rows > MatrixValidator.LARGE_SIZE:
            warnings.append(f"n={rows} is large; expect long run times")

        return ValidationResult(is_valid=True, warnings=warnings)

    @staticmethod
    def require(A) -> ComplexMatrix:
        """
        Return A as a complex array or raise.

        Raises:
            DimensionError: On a non-square or too small matrix
            NumericalError: On non-finite or zero entries
        """
        result = MatrixValidator.validate(A)
        if not result.is_valid:
            message = result.error_message or "invalid matrix"
            if "non-finite" in message or "zero" in message:
                raise NumericalError(message)
            raise DimensionError(message)
        return np.asarray(A, dtype=complex)


class ConfigValidator:
    """
    Validates run configuration before dispatch.
    """

    SUBCOMMANDS: Set[str] = {"solve", "sample-start", "bench", "verify"}
    ALGORITHMS: Set[str] = {"a", "b"}
    FORMATS: Set[str] = {"json", "csv", "text"}

    @staticmethod
    def validate(config, known_experiments: Optional[Iterable[str]] = None) -> ValidationResult:
        """
        Validate an AppConfig.

        Args:
            config: Run configuration
            known_experiments: Names accepted by the --experiments filter

        Returns:
            ValidationResult with any issues
        """
        warnings = []

        if config.subcommand not in ConfigValidator.SUBCOMMANDS:
            return ValidationResult(
                is_valid=False,
                error_message=f"Unknown subcommand: {config.subcommand}"
            )

        if config.subcommand == "solve" and not config.input_path:
            return ValidationResult(
                is_valid=False,
                error_message="solve requires --input"
            )

        if config.algorithm not in ConfigValidator.ALGORITHMS:
            return ValidationResult(
                is_valid=False,
                error_message=f"Unknown algorithm: {config.algorithm}"
            )

        if config.format not in ConfigValidator.FORMATS:
            return ValidationResult(
                is_valid=False,
                error_message=f"Unknown format: {config.format}. "
                              f"Allowed: {', '.join(sorted(ConfigValidator.FORMATS))}"
            )

        if not (math.isfinite(config.eps) and 0.0 < config.eps <= 0.5):
            return ValidationResult(
                is_valid=False,
                error_message=f"--eps must be in (0, 1/2], got {config.eps}"
            )

        if config.max_steps < 1:
            return ValidationResult(
                is_valid=False,
                error_message=f"--max-steps must be >= 1, got {config.max_steps}"
            )

        if config.seed is not None and not 0 <= config.seed < 2 ** 64:
            return ValidationResult(
                is_valid=False,
                error_message="--seed must be an unsigned 64-bit integer"
            )

        if config.subcommand == "sample-start" and (config.n is None or config.n < 2):
            return ValidationResult(
                is_valid=False,
                error_message="sample-start requires --n >= 2"
            )

        if config.trials is not None and config.trials < 1:
            return ValidationResult(
                is_valid=False,
                error_message="--trials must be >= 1"
            )

        if config.samples is not None and config.samples < 20:
            return ValidationResult(
                is_valid=False,
                error_message="--samples must be >= 20 (one per median-of-means block)"
            )

        if config.subcommand == "bench":
            if any(n < 2 for n in config.n_list):
                return ValidationResult(
                    is_valid=False,
                    error_message="bench sizes must be >= 2"
                )
            if config.trials is not None and config.trials < 20:
                warnings.append(f"{config.trials} trials per size give noisy means")

        if config.experiments and known_experiments is not None:
            unknown = sorted(set(config.experiments) - set(known_experiments))
            if unknown:
                return ValidationResult(
                    is_valid=False,
                    error_message=f"Unknown experiments: {', '.join(unknown)}"
                )

        if config.threads < 1:
            return ValidationResult(
                is_valid=False,
                error_message="thread count must be >= 1"
            )

        return ValidationResult(is_valid=True, warnings=warnings)
