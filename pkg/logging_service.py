"""
Logging service for solver and verification runs.

Provides:
- Dated log file plus a console handler on the 'eigenflow' logger
- JSON run records with parameters and results
- Run history
- Tracker traces as JSON lines
"""

import json
import logging
import sys
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from models import StepRecord


LOGGER_NAME = "eigenflow"


class LoggingService:
    """
    Structured logging for eigenflow runs.

    Computational modules log through child loggers
    ('eigenflow.homotopy', ...); this service owns the handlers.
    """

    def __init__(self, log_dir: Optional[Path] = None, console_level: int = logging.WARNING):
        """
        Initialize logging service.

        Args:
            log_dir: Directory for log files (default: ~/.eigenflow/logs)
            console_level: Threshold of the stderr handler
        """
        if log_dir is None:
            log_dir = Path.home() / ".eigenflow" / "logs"

        self.log_dir = Path(log_dir)
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            print(f"Warning: Could not create log directory: {e}", file=sys.stderr)

        self.logger = self._setup_logger(console_level)
        self._runs: Dict[str, datetime] = {}

    def _setup_logger(self, console_level: int) -> logging.Logger:
        """Attach file and console handlers, replacing earlier ones."""
        logger = logging.getLogger(LOGGER_NAME)
        logger.setLevel(logging.DEBUG)

        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()

        formatter = logging.Formatter(
            "%(asctime)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )

        console = logging.StreamHandler(sys.stderr)
        console.setLevel(console_level)
        console.setFormatter(formatter)
        logger.addHandler(console)

        log_file = self.log_dir / f"eigenflow_{datetime.now():%Y%m%d}.log"
        try:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Could not create log file: {e}")

        return logger

    def log_run_start(self, kind: str, params: Dict[str, Any]) -> str:
        """
        Log the start of a run.

        Returns:
            Run id used by log_run_complete
        """
        run_id = uuid.uuid4().hex[:12]
        self._runs[run_id] = datetime.now()
        self.logger.info(f"Run {run_id} ({kind}) started: {json.dumps(params, sort_keys=True, default=str)}")
        return run_id

    def log_run_complete(self, run_id: str, kind: str, success: bool,
                         duration_ms: float, summary: Dict[str, Any]) -> None:
        """
        Log run completion and write its JSON record.
        """
        status = "SUCCESS" if success else "FAILED"
        self.logger.info(f"Run {run_id} ({kind}) {status} in {duration_ms:.2f}ms")

        record = {
            "run_id": run_id,
            "kind": kind,
            "started": self._runs.pop(run_id, datetime.now()).isoformat(),
            "finished": datetime.now().isoformat(),
            "success": success,
            "duration_ms": duration_ms,
            "summary": summary,
        }
        self._write_json(self.log_dir / f"run_{run_id}.json", record)

    def _write_json(self, path: Path, data: Dict[str, Any]) -> None:
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2, sort_keys=True, default=str)
        except OSError as e:
            self.logger.error(f"Could not write run record: {e}")

    def get_run_history(self, limit: int = 10) -> List[Dict[str, Any]]:
        """
        Recent run records, newest first.

        Args:
            limit: Maximum number of records to return
        """
        history = []
        try:
            log_files = sorted(
                self.log_dir.glob("run_*.json"),
                key=lambda p: p.stat().st_mtime,
                reverse=True
            )
            for log_file in log_files[:limit]:
                try:
                    with open(log_file, "r", encoding="utf-8") as f:
                        history.append(json.load(f))
                except (OSError, json.JSONDecodeError):
                    continue
        except OSError as e:
            self.logger.error(f"Error loading run history: {e}")
        return history

    @staticmethod
    def write_trace(path: Path, trace: Iterable[StepRecord],
                    path_index: Optional[int] = None, append: bool = False) -> int:
        """
        Write a tracker trace as JSON lines {"b", "mu", "t"}.

        Args:
            path_index: Added to every record as "path" when given
            append: Extend an existing file instead of replacing it

        Returns:
            Number of records written
        """
        count = 0
        with open(path, "a" if append else "w", encoding="utf-8") as f:
            for record in trace:
                row = record.to_dict()
                if path_index is not None:
                    row["path"] = path_index
                f.write(json.dumps(row, sort_keys=True) + "\n")
                count += 1
        logging.getLogger(LOGGER_NAME).debug(f"Wrote {count} trace records to {path}")
        return count


class PerformanceLogger:
    """
    Wall-time metrics per path, experiment or run.
    """

    def __init__(self):
        self.metrics: Dict[str, List[float]] = {}

    def record_metric(self, name: str, value: float) -> None:
        self.metrics.setdefault(name, []).append(value)

    def get_summary(self) -> Dict[str, Dict[str, float]]:
        """Count, mean, min and max of every metric."""
        summary = {}
        for name, values in self.metrics.items():
            if not values:
                continue
            summary[name] = {
                "count": len(values),
                "avg": sum(values) / len(values),
                "min": min(values),
                "max": max(values),
            }
        return summary
