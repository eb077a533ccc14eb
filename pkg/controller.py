"""
Application controller.

Turns an AppConfig into a run: validates it, resolves the seed,
dispatches the subcommand, writes results and records the run.
"""

import logging
import os
import secrets
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

from experiments import SUITE, exp_step_scaling, run_suite
from export_service import ExportService
from logging_service import LoggingService, PerformanceLogger
from matrix_parser import MatrixParser
from models import (
    EigenflowError,
    ExperimentReport,
    InputError,
    RngHandle,
    SolveOutput,
    SolverBudget,
    StepConstants,
)
from solvers import algorithm_a, algorithm_b, draw_random_start
from threading_worker import default_workers
from validator import ConfigValidator, MatrixValidator


logger = logging.getLogger("eigenflow.controller")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_PARTIAL_FAILURE = 2
EXIT_VERIFY_FAILED = 3

BENCH_TRIALS = 20

DEFAULT_FORMATS = {"solve": "json", "sample-start": "json", "bench": "csv", "verify": "text"}


@dataclass
class AppConfig:
    """Run configuration."""
    subcommand: str = "solve"
    input_path: Optional[Path] = None
    algorithm: str = "a"
    seed: Optional[int] = None
    eps: float = 1.0 / 16.0
    max_steps: int = 10 ** 6
    output_path: Optional[Path] = None
    format: str = "json"
    n: Optional[int] = None
    n_list: List[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    trials: Optional[int] = None  # None keeps each command's default
    samples: Optional[int] = None
    experiments: List[str] = field(default_factory=list)
    threads: int = 1
    trace: Optional[Path] = None
    log_dir: Optional[Path] = None
    enable_logging: bool = True

    @classmethod
    def from_env(cls, **values) -> "AppConfig":
        """
        Build a config, taking the thread count from EIGENFLOW_THREADS
        unless one is given explicitly.
        """
        if values.get("threads") is None:
            values["threads"] = default_workers() if os.environ.get("EIGENFLOW_THREADS") else 1
        if values.get("format") is None:
            values["format"] = DEFAULT_FORMATS.get(values.get("subcommand", "solve"), "json")
        return cls(**values)


class ApplicationController:
    """
    Orchestrates the four subcommands.

    Every run_* method returns a process exit code; errors are reported
    on stderr and in the log, never raised to the caller.
    """

    def __init__(self, config: Optional[AppConfig] = None, stderr=None):
        self.config = config or AppConfig()
        self.stderr = stderr or sys.stderr

        self.parser = MatrixParser()
        self.exporter = ExportService()
        self.performance = PerformanceLogger()
        self.logging = LoggingService(self.config.log_dir) if self.config.enable_logging else None

        self.seed: Optional[int] = None

    # ------------------------------------------------------------------
    # Entry point
    # ------------------------------------------------------------------

    def run(self) -> int:
        validation = ConfigValidator.validate(self.config, SUITE.keys())
        if not validation.is_valid:
            self._report_error(validation.error_message)
            return EXIT_INPUT_ERROR
        for warning in validation.warnings:
            logger.warning(warning)

        handlers: Dict[str, Callable[[], int]] = {
            "solve": self.run_solve,
            "sample-start": self.run_sample_start,
            "bench": self.run_bench,
            "verify": self.run_verify,
        }
        return handlers[self.config.subcommand]()

    def resolve_seed(self) -> int:
        """The configured seed, or a fresh one from system entropy (reported on stderr)."""
        if self.config.seed is not None:
            self.seed = self.config.seed
        else:
            self.seed = secrets.randbits(64)
            print(f"seed: {self.seed}", file=self.stderr)
        return self.seed

    def budget(self, threads: Optional[int] = None) -> SolverBudget:
        return SolverBudget(
            constants=StepConstants(eps=self.config.eps),
            max_steps=self.config.max_steps,
            trace=self.config.trace is not None,
            threads=self.config.threads if threads is None else threads,
        )

    # ------------------------------------------------------------------
    # Subcommands
    # ------------------------------------------------------------------

    def run_solve(self) -> int:
        """
        Solve the input matrix with the configured algorithm.

        Exit 0 when every path is certified, 2 when some failed, 1 on
        bad input.
        """
        try:
            A = self.parser.read(self.config.input_path)
        except InputError as e:
            self._report_error(str(e))
            return EXIT_INPUT_ERROR

        check = MatrixValidator.validate(A)
        if not check.is_valid:
            self._report_error(check.error_message)
            return EXIT_INPUT_ERROR
        for warning in check.warnings:
            logger.warning(warning)

        seed = self.resolve_seed()
        n = A.shape[0]
        params = {"n": n, "algorithm": self.config.algorithm, "seed": seed, "eps": self.config.eps}
        run_id = self._run_start("solve", params)
        started = time.perf_counter()

        try:
            if self.config.algorithm == "a":
                output = algorithm_a(A, self.budget())
            else:
                output = algorithm_b(A, RngHandle(seed), self.budget())
        except EigenflowError as e:
            self._report_error(f"solve failed: {e}")
            self._run_complete(run_id, "solve", False, started, {"error": str(e)})
            return EXIT_INPUT_ERROR

        if self.config.trace is not None:
            self._write_traces(output)

        document = self.exporter.solve_document(output, n, seed, self.config.eps)
        if self.config.format == "text":
            content = self.exporter.solve_to_text(document)
        elif self.config.format == "csv":
            content = self.exporter.solve_to_csv(document)
        else:
            content = self.exporter.to_json(document) + "\n"

        success = output.all_succeeded()
        self._run_complete(run_id, "solve", success, started, {
            "pairs": len(output.pairs),
            "failed_paths": output.failed_paths,
            "total_steps": output.total_steps,
        })

        if not self.exporter.write(content, self.config.output_path):
            return EXIT_INPUT_ERROR
        if not success:
            print(f"{len(output.failed_paths)} path(s) failed: {output.failed_paths}", file=self.stderr)
            return EXIT_PARTIAL_FAILURE
        return EXIT_OK

    def run_sample_start(self) -> int:
        """Draw one random start system and write it."""
        seed = self.resolve_seed()
        run_id = self._run_start("sample-start", {"n": self.config.n, "seed": seed})
        started = time.perf_counter()

        try:
            start = draw_random_start(self.config.n, RngHandle(seed))
        except EigenflowError as e:
            self._report_error(f"sampling failed: {e}")
            self._run_complete(run_id, "sample-start", False, started, {"error": str(e)})
            return EXIT_INPUT_ERROR

        document = self.exporter.start_document(start, seed)
        if self.config.format == "json":
            content = self.exporter.to_json(document) + "\n"
        else:
            content = self.exporter.start_to_text(document)

        self._run_complete(run_id, "sample-start", True, started,
                           {"rejections": start.omega.rejections})
        return EXIT_OK if self.exporter.write(content, self.config.output_path) else EXIT_INPUT_ERROR

    def run_bench(self) -> int:
        """Mean homotopy steps against n for the configured algorithm."""
        seed = self.resolve_seed()
        algo = self.config.algorithm
        params = {"algorithm": algo, "n_list": self.config.n_list,
                  "trials": self._bench_trials(), "seed": seed}
        run_id = self._run_start("bench", params)
        started = time.perf_counter()

        reports = exp_step_scaling(
            algo, self.config.n_list, self._bench_trials(), RngHandle(seed),
            self.budget(threads=1), self.config.threads,
        )
        self.performance.record_metric("bench_ms", (time.perf_counter() - started) * 1000)

        self._print_performance()

        self._run_complete(run_id, "bench", True, started,
                           {"means": [r.estimate for r in reports]})
        ok = self.exporter.write(self._render_reports(reports, "EIGENFLOW BENCHMARK"),
                                 self.config.output_path)
        return EXIT_OK if ok else EXIT_INPUT_ERROR

    def run_verify(self) -> int:
        """
        Run the verification suite; exit 3 if any verdict fails.
        """
        seed = self.resolve_seed()
        params = {"experiments": self.config.experiments or "all", "seed": seed,
                  "samples": self.config.samples, "trials": self.config.trials}
        run_id = self._run_start("verify", params)
        started = time.perf_counter()

        try:
            reports = run_suite(
                RngHandle(seed),
                names=self.config.experiments,
                samples=self.config.samples,
                trials=self.config.trials,
                threads=self.config.threads,
                budget=self.budget(threads=1),
            )
        except KeyError as e:
            self._report_error(str(e))
            self._run_complete(run_id, "verify", False, started, {"error": str(e)})
            return EXIT_INPUT_ERROR

        self.performance.record_metric("verify_ms", (time.perf_counter() - started) * 1000)
        self._print_performance()
        failed = [r for r in reports if not r.passed]
        self._run_complete(run_id, "verify", not failed, started, {
            "reports": len(reports),
            "failed": [f"{r.name}[n={r.n}]" for r in failed],
        })

        if not self.exporter.write(self._render_reports(reports, "EIGENFLOW VERIFICATION"),
                                   self.config.output_path):
            return EXIT_INPUT_ERROR

        if failed:
            print(f"{len(failed)} of {len(reports)} checks failed:", file=self.stderr)
            for report in failed:
                print(f"  {report.name} n={report.n}: estimate {report.estimate:.6g}, "
                      f"reference {report.reference:.6g} ±{report.half_width:.3g} {report.notes}",
                      file=self.stderr)
            return EXIT_VERIFY_FAILED
        return EXIT_OK

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _bench_trials(self) -> int:
        return self.config.trials if self.config.trials is not None else BENCH_TRIALS

    def _print_performance(self) -> None:
        for name, stats in self.performance.get_summary().items():
            print(f"{name}: count={stats['count']} avg={stats['avg']:.1f} "
                  f"min={stats['min']:.1f} max={stats['max']:.1f}", file=self.stderr)

    def _render_reports(self, reports: List[ExperimentReport], title: str) -> str:
        if self.config.format == "csv":
            return self.exporter.reports_to_csv(reports)
        if self.config.format == "json":
            return self.exporter.to_json([self.exporter.report_record(r) for r in reports]) + "\n"
        return self.exporter.reports_to_text(reports, title)

    def _write_traces(self, output: SolveOutput) -> None:
        first = True
        for outcome in output.outcomes:
            if outcome.trace is None:
                continue
            try:
                LoggingService.write_trace(self.config.trace, outcome.trace,
                                           path_index=outcome.index, append=not first)
            except OSError as e:
                logger.error(f"Could not write trace: {e}")
                return
            first = False

    def _report_error(self, message: str) -> None:
        print(f"error: {message}", file=self.stderr)
        logger.error(message)

    def _run_start(self, kind: str, params: dict) -> Optional[str]:
        if self.logging is None:
            return None
        return self.logging.log_run_start(kind, params)

    def _run_complete(self, run_id: Optional[str], kind: str, success: bool,
                      started: float, summary: dict) -> None:
        if self.logging is None or run_id is None:
            return
        duration_ms = (time.perf_counter() - started) * 1000
        self.logging.log_run_complete(run_id, kind, success, duration_ms, summary)
