"""
Tests for the Monte Carlo harness.

Sample counts are far below the verify defaults; the checks use
margins of several standard errors.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from experiments import (
    SUITE,
    adjugate_frobenius_sq,
    determinant_ratio,
    exp_coarea_identity,
    exp_det_moment,
    exp_geodesic_constant,
    exp_hexagonal_bound,
    exp_inv_det_moment,
    exp_mu_average,
    exp_mu_lipschitz,
    exp_mu_sphere,
    exp_newton_convergence,
    exp_pinv_moment,
    exp_sn_cn_bounds,
    exp_solver_conformance,
    exp_step_scaling,
    exp_truncation_mass,
    log_log_slope,
    median_of_means,
    mu_f_squared_terms,
    newton_decay_holds,
    run_suite,
    sample_blocks,
    sphere_distances,
    step_bound_holds,
)
from core_linalg import sample_gaussian_batch
from models import ReportKind, RngHandle, Verdict


def test_median_of_means_constant():
    estimate, half_width, plain = median_of_means(np.full(200, 3.0))
    assert estimate == 3.0
    assert half_width == 0.0
    assert plain == 3.0


def test_median_of_means_resists_outlier():
    values = np.ones(2000)
    values[7] = 1e9
    estimate, _, plain = median_of_means(values)
    assert estimate == 1.0
    assert plain > 1e5


def test_sample_blocks_independent_of_threads():
    def draw(count, stream):
        return np.abs(np.linalg.det(sample_gaussian_batch(count, 2, 2, stream))) ** 2

    serial = sample_blocks(draw, 1000, RngHandle(3), threads=1)
    parallel = sample_blocks(draw, 1000, RngHandle(3), threads=4)
    assert serial.shape == (1000,)
    assert np.array_equal(serial, parallel)


def test_det_moment():
    report = exp_det_moment(2, 1.0, 20_000, RngHandle(1))
    assert report.reference == 2.0
    assert report.passed

    scaled = exp_det_moment(1, 2.0, 20_000, RngHandle(2))
    assert scaled.reference == 4.0
    assert scaled.passed


def test_adjugate_identity_for_scalars():
    stack = sample_gaussian_batch(10, 1, 1, RngHandle(4))
    assert_allclose(adjugate_frobenius_sq(stack), 1.0)


def test_inv_det_moment():
    report = exp_inv_det_moment(2, 20_000, RngHandle(5))
    assert report.reference == 4.0
    assert report.passed


def test_pinv_moment():
    report = exp_pinv_moment(2, 40_000, RngHandle(6))
    assert report.reference == 1.0
    assert report.passed
    assert report.plain_mean is not None


def test_coarea_identity_constant_function():
    report = exp_coarea_identity(2, "one", 20_000, RngHandle(7))
    assert report.estimate == 2.0
    assert abs(report.estimate - report.reference) <= 2 * report.tolerance


def test_coarea_identity_gaussian_function():
    report = exp_coarea_identity(2, "gauss", 20_000, RngHandle(8))
    assert abs(report.estimate - report.reference) <= 2 * report.tolerance


def test_geodesic_constant():
    report = exp_geodesic_constant(2, 20_000, RngHandle(9))
    assert_allclose(report.reference, math.pi / 2)
    assert report.passed


def test_antipodal_distances_sum_to_pi():
    A = sample_gaussian_batch(50, 2, 2, RngHandle(10))
    B = sample_gaussian_batch(50, 2, 2, RngHandle(11))
    A /= np.linalg.norm(A, axis=(1, 2))[:, None, None]
    B /= np.linalg.norm(B, axis=(1, 2))[:, None, None]
    assert_allclose(sphere_distances(A, B) + sphere_distances(A, -B), math.pi, atol=1e-12)


def test_mu_average_bounds():
    centered = exp_mu_average(2, 1.0, None, 2000, RngHandle(12))
    shifted = exp_mu_average(2, 1.0, np.eye(2, dtype=complex), 2000, RngHandle(13))
    assert centered.kind == ReportKind.BOUND
    assert centered.reference == 2.0
    assert centered.passed
    assert shifted.passed


def test_mu_f_squared_terms_of_diagonal():
    terms = mu_f_squared_terms(np.diag([1.0, 2.0]).astype(complex)[None])
    assert terms.shape == (1, 2)
    assert_allclose(terms.sum(axis=1), [10.0])


def test_mu_sphere_bound():
    report = exp_mu_sphere(2, 2000, RngHandle(14))
    assert report.reference == 8.0
    assert report.passed


def test_truncation_mass():
    report = exp_truncation_mass(3, 2000, RngHandle(15))
    assert report.passed
    assert 1.0 <= report.estimate <= 2.0


def test_sn_cn_bounds():
    acceptance, ratio = exp_sn_cn_bounds(3, 1000, RngHandle(16))
    assert acceptance.name == "sn_cn_acceptance"
    assert acceptance.passed
    assert ratio.reference == pytest.approx(2 * math.e)
    assert ratio.passed


def test_determinant_ratio_at_zero_shift():
    B = np.array([[2.0, 1.0], [0.0, 3.0j]])
    assert_allclose(determinant_ratio(B, 0.0), 1.0)


def test_hexagonal_bound():
    seven, bound = exp_hexagonal_bound(16)
    assert seven.estimate == pytest.approx(6.0)
    assert seven.passed
    assert bound.passed


def test_mu_lipschitz_experiment():
    report = exp_mu_lipschitz(3, 10, RngHandle(24))
    assert report.kind == ReportKind.BOUND
    assert report.estimate == 0.0
    assert report.passed


def test_newton_decay_rule():
    assert newton_decay_holds([1e-3, 4e-7, 1e-13, 1e-16])
    assert not newton_decay_holds([1e-3, 9e-4, 1e-13, 1e-16])
    assert newton_decay_holds([1e-7, 1e-14, 9e-15])
    assert not newton_decay_holds([1e-7, 5e-14, 1e-16])


def test_newton_convergence():
    report = exp_newton_convergence(5, 50, RngHandle(17))
    assert report.estimate == 0.0
    assert report.passed


def test_step_bound_rule():
    assert step_bound_holds(1001, 1.0)
    assert not step_bound_holds(1002, 1.0)


def test_solver_conformance_a():
    solver, bound = exp_solver_conformance("a", 2, 2, RngHandle(18))
    assert solver.name == "solver_a"
    assert solver.estimate == 0.0
    assert bound.samples == 4
    assert bound.estimate == 0.0


def test_solver_conformance_a_at_three():
    solver, bound = exp_solver_conformance("a", 3, 3, RngHandle(23))
    assert solver.estimate == 0.0
    assert bound.samples == 9
    assert bound.estimate == 0.0


def test_solver_conformance_b():
    solver, bound = exp_solver_conformance("b", 3, 5, RngHandle(25))
    assert solver.name == "solver_b"
    assert solver.estimate <= 0.2
    assert bound.estimate == 0.0


def test_step_scaling_is_informational():
    reports = exp_step_scaling("a", [2, 3], 2, RngHandle(19))
    assert [r.n for r in reports] == [2, 3, 3]
    assert all(r.verdict == Verdict.INFO for r in reports)
    assert all(r.estimate > 0 for r in reports[:2])
    assert reports[-1].name == "step_scaling_a_slope"


def test_log_log_slope():
    n_list = [2, 4, 8]
    assert_allclose(log_log_slope(n_list, [n ** 3 for n in n_list]), 3.0)
    assert math.isnan(log_log_slope([2], [5.0]))


def test_run_suite_filter_and_determinism():
    first = run_suite(RngHandle(20), names=["det_moment"], samples=2000)
    second = run_suite(RngHandle(20), names=["det_moment"], samples=2000)
    assert [r.name for r in first] == ["det_moment", "det_moment"]
    assert [r.estimate for r in first] == [r.estimate for r in second]


def test_run_suite_unknown_name():
    with pytest.raises(KeyError):
        run_suite(RngHandle(1), names=["no_such_experiment"])


def test_suite_registry():
    assert list(SUITE)[0] == "det_moment"
    assert "solver_conformance" in SUITE
    assert list(SUITE)[-1] == "mu_lipschitz"
