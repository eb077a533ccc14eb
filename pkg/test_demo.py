"""
Test & Demonstration Script

Walks through the solver stack end to end without the CLI.
"""

import sys
from pathlib import Path

import numpy as np

# Add project to path
sys.path.insert(0, str(Path(__file__).parent))

from core_linalg import reference_eigendecomposition, sample_gaussian_matrix
from eigen_geometry import condition_numbers
from experiments import exp_hexagonal_bound
from export_service import ExportService
from matching import matching_distance
from matrix_parser import MatrixParser
from models import RngHandle
from solvers import algorithm_a, algorithm_b, draw_random_start, hexagonal_lattice_points
from validator import MatrixValidator


def test_matrix_parser():
    """Test both matrix file formats."""
    print("\n" + "="*70)
    print("TESTING: Matrix Parser")
    print("="*70)

    parser = MatrixParser()

    test_cases = [
        '{"rows": 2, "cols": 2, "data": [[1, 0], [0, 1], [0, 0], [2, -1]]}',
        "2 2\n1 0\n0 1\n0 0\n2 -1\n",
        "# comment lines are skipped\n2 2\n1.0 0.0\n0.0 1.0\n0 0\n2e0 -1e0\n",
    ]

    matrices = []
    for text in test_cases:
        A = parser.parse(text)
        matrices.append(A)
        print(f"\nInput: {text.splitlines()[0][:40]!r}")
        print(f"  Shape: {A.shape}")
        print(f"  A[1,1] = {A[1, 1]}")

    for A in matrices[1:]:
        assert np.array_equal(A, matrices[0])


def test_matrix_validation():
    """Test input validation."""
    print("\n" + "="*70)
    print("TESTING: Matrix Validation")
    print("="*70)

    test_cases = [
        ("2x2 diagonal", np.diag([1.0, 2.0])),
        ("3x2 rectangle", np.ones((3, 2))),
        ("1x1 scalar", np.ones((1, 1))),
        ("zero matrix", np.zeros((3, 3))),
        ("infinite entry", np.array([[np.inf, 0.0], [0.0, 1.0]])),
    ]

    for label, A in test_cases:
        result = MatrixValidator.validate(A)
        print(f"\nMatrix: {label}")
        print(f"  Valid: {result.is_valid}")
        if not result.is_valid:
            print(f"  Error: {result.error_message}")

    assert MatrixValidator.validate(test_cases[0][1]).is_valid
    assert not any(MatrixValidator.validate(A).is_valid for _, A in test_cases[1:])


def test_hexagonal_start():
    """Test the deterministic start lattice."""
    print("\n" + "="*70)
    print("TESTING: Hexagonal Start")
    print("="*70)

    for z in hexagonal_lattice_points(7):
        print(f"  {z.real:+.4f} {z.imag:+.4f}i  |z| = {abs(z):.4f}")

    for report in exp_hexagonal_bound(32):
        print(f"\n{report.name}: {report.estimate:.4f} vs {report.reference} -> {report.verdict.value}")
        assert report.passed


def test_algorithm_a():
    """Test all-eigenpairs solve against the reference eigensolver."""
    print("\n" + "="*70)
    print("TESTING: Algorithm a")
    print("="*70)

    A = sample_gaussian_matrix(3, 3, rng=RngHandle(2024))
    output = algorithm_a(A)

    for outcome in output.outcomes:
        print(f"\nPath {outcome.index}: {outcome.status.value}")
        print(f"  lambda = {outcome.triple.lam:.10f}")
        print(f"  steps  = {outcome.steps}, mu = {outcome.mu:.3f}")
        print(f"  residuals = {[f'{r:.1e}' for r in outcome.residuals]}")

    reference = [lam for lam, _ in reference_eigendecomposition(A)]
    distance = matching_distance([p.lam for p in output.pairs], reference)
    print(f"\nMatching distance to oracle: {distance:.2e}")
    assert distance < 1e-8


def test_algorithm_b():
    """Test the randomized single-eigenpair solve."""
    print("\n" + "="*70)
    print("TESTING: Algorithm b")
    print("="*70)

    A = np.array([[2.0, 1.0j, 0.0], [0.0, -1.0, 1.0], [0.5, 0.0, 1.0j]])
    start = draw_random_start(3, RngHandle(77))
    print(f"\nRandom start: z = {start.omega.z:.4f}, rejections = {start.omega.rejections}")

    output = algorithm_b(A, RngHandle(77))
    pair = output.pairs[0]
    report = condition_numbers(pair)
    print(f"lambda = {pair.lam:.10f}")
    print(f"steps = {output.total_steps}, mu = {report.mu:.3f}, mu_F = {report.mu_f:.3f}")
    assert pair.residual() < 1e-10

    document = ExportService.solve_document(output, 3, 77, 1 / 16)
    print(ExportService.solve_to_text(document))


def run_all_tests():
    """Run all tests."""
    print("\n" + "#"*70)
    print("# EIGENFLOW - CORE FUNCTIONALITY TESTS")
    print("#"*70)

    test_matrix_parser()
    test_matrix_validation()
    test_hexagonal_start()
    test_algorithm_a()
    test_algorithm_b()

    print("\n" + "="*70)
    print("ALL TESTS COMPLETED")
    print("="*70)
    print("\nTo run the verification suite, run: python main.py verify")


if __name__ == '__main__':
    run_all_tests()
