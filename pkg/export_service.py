"""
Export service for solve results, start systems and experiment reports.

JSON output has sorted keys and serializes complex numbers as
[re, im] pairs. Reports are also available as CSV and plain text.
"""

import csv
import io
import json
import logging
import math
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from matrix_parser import MatrixParser
from models import ExperimentReport, RngHandle, SolveOutput, StartSystem


logger = logging.getLogger("eigenflow.export")

REPORT_COLUMNS = ["name", "n", "samples", "estimate", "half_width", "reference", "verdict", "seed"]


def complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def vector_pairs(v: np.ndarray) -> List[List[float]]:
    return [complex_pair(z) for z in np.asarray(v).ravel()]


def finite_or_none(x: Optional[float]) -> Optional[float]:
    """JSON has no NaN or infinity."""
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def seed_label(seed: Optional[RngHandle]) -> str:
    return "" if seed is None else f"{seed.seed}:{seed.stream_id}"


class ExportService:
    """
    Serialization of eigenflow results.
    """

    @staticmethod
    def solve_document(output: SolveOutput, n: int, seed: Optional[int], eps: float) -> Dict[str, Any]:
        """
        SolveOutput as a JSON-ready dict.

        wall_ms is the only field that varies between identical runs.
        """
        pairs = []
        for outcome in output.outcomes:
            if not outcome.succeeded:
                continue
            pairs.append({
                "path": outcome.index,
                "lambda": complex_pair(outcome.triple.lam),
                "v": vector_pairs(outcome.triple.v),
                "mu": finite_or_none(outcome.mu),
                "steps": outcome.steps,
                "residual": finite_or_none(outcome.residuals[-1]) if outcome.residuals else None,
            })

        failures = [
            {"path": o.index, "status": o.status.value, "steps": o.steps, "error": o.error_message}
            for o in output.outcomes if not o.succeeded
        ]

        metadata = {
            "n": n,
            "algorithm": output.algorithm,
            "seed": seed,
            "eps": eps,
            "wall_ms": round(output.wall_time_ms, 3),
            "total_steps": output.total_steps,
        }
        if output.rejections is not None:
            metadata["rejections"] = output.rejections

        return {"pairs": pairs, "failed_paths": failures, "metadata": metadata}

    @staticmethod
    def start_document(start: StartSystem, seed: Optional[int]) -> Dict[str, Any]:
        """Random start system with its sampler draw."""
        lam, v = start.pairs[0]
        document = {
            "n": start.A0.shape[0],
            "seed": seed,
            "A0": MatrixParser.to_document(start.A0),
            "pair": {"lambda": complex_pair(lam), "v": vector_pairs(v)},
        }
        if start.omega is not None:
            sample = start.omega
            document["omega"] = {
                "z": complex_pair(sample.z),
                "M": MatrixParser.to_document(sample.M),
                "U": MatrixParser.to_document(sample.U),
                "w": vector_pairs(sample.w),
                "rejections": sample.rejections,
            }
        return document

    @staticmethod
    def report_record(report: ExperimentReport) -> Dict[str, Any]:
        return {
            "name": report.name,
            "n": report.n,
            "samples": report.samples,
            "estimate": finite_or_none(report.estimate),
            "half_width": finite_or_none(report.half_width),
            "reference": finite_or_none(report.reference),
            "tolerance": finite_or_none(report.tolerance),
            "kind": report.kind.value,
            "verdict": report.verdict.value,
            "plain_mean": finite_or_none(report.plain_mean),
            "notes": report.notes,
            "seed": seed_label(report.seed),
        }

    @staticmethod
    def to_json(document: Any) -> str:
        return json.dumps(document, indent=2, sort_keys=True)

    @staticmethod
    def reports_to_csv(reports: Sequence[ExperimentReport]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for report in reports:
            writer.writerow([
                report.name,
                report.n,
                report.samples,
                repr(float(report.estimate)),
                repr(float(report.half_width)),
                repr(float(report.reference)),
                report.verdict.value,
                seed_label(report.seed),
            ])
        return buffer.getvalue()

    @staticmethod
    def reports_to_text(reports: Sequence[ExperimentReport], title: str = "EIGENFLOW REPORT") -> str:
        """
        Human-readable report with a pass/fail summary.
        """
        lines = ["=" * 70, title, "=" * 70, f"Generated: {datetime.now():%Y-%m-%d %H:%M:%S}", ""]

        failed = [r for r in reports if not r.passed]
        lines.append(f"Reports: {len(reports)}  Failed: {len(failed)}")
        lines.append("-" * 70)

        for report in reports:
            lines.append(
                f"{report.verdict.value.upper():5} {report.name:<22} n={report.n:<3} "
                f"est={report.estimate:<12.6g} ±{report.half_width:<10.3g} ref={report.reference:.6g}"
            )
            if report.notes:
                lines.append(f"      {report.notes}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def solve_to_text(document: Dict[str, Any]) -> str:
        meta = document["metadata"]
        lines = [
            f"algorithm {meta['algorithm']}  n={meta['n']}  seed={meta['seed']}  "
            f"steps={meta['total_steps']}  {meta['wall_ms']:.1f} ms"
        ]
        for pair in document["pairs"]:
            re_part, im_part = pair["lambda"]
            lines.append(f"  path {pair['path']}: lambda = {re_part:.12g} {im_part:+.12g}i  "
                         f"mu={pair['mu']}  steps={pair['steps']}")
        for failure in document["failed_paths"]:
            lines.append(f"  path {failure['path']} FAILED ({failure['status']}): {failure['error']}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def solve_to_csv(document: Dict[str, Any]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["path", "lambda_re", "lambda_im", "mu", "steps", "residual"])
        for pair in document["pairs"]:
            writer.writerow([pair["path"], *pair["lambda"], pair["mu"], pair["steps"], pair["residual"]])
        return buffer.getvalue()

    @staticmethod
    def start_to_text(document: Dict[str, Any]) -> str:
        """Start matrix in the plain-text matrix format, preceded by comments."""
        z_re, z_im = document["pair"]["lambda"]
        lines = [f"# n={document['n']} seed={document['seed']} z={z_re!r} {z_im!r}"]
        if "omega" in document:
            lines.append(f"# rejections={document['omega']['rejections']}")
        A0 = document["A0"]
        lines.append(f"{A0['rows']} {A0['cols']}")
        lines += [f"{re_part!r} {im_part!r}" for re_part, im_part in A0["data"]]
        return "\n".join(lines) + "\n"

    @staticmethod
    def write(content: str, output_path: Optional[Path] = None) -> bool:
        """
        Write to a file, or to stdout when no path is given.

        Returns:
            True if successful
        """
        if output_path is None:
            sys.stdout.write(content)
            sys.stdout.flush()
            return True
        try:
            Path(output_path).write_text(content, encoding="utf-8")
            return True
        except OSError as e:
            logger.error(f"Export error: {e}")
            return False
