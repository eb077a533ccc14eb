"""
Background workers for independent numerical tasks.

Runs homotopy paths and Monte Carlo blocks concurrently. Every task
owns its random stream, so results never depend on scheduling; they
are returned in submission order.
"""

import logging
import os
import queue
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, List, Optional


logger = logging.getLogger("eigenflow.worker")


class WorkerStatus(Enum):
    """Worker thread status."""
    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


@dataclass
class WorkerResult:
    """Result from one task."""
    success: bool
    data: Any = None
    error: Optional[str] = None
    exception: Optional[BaseException] = None

    def unwrap(self) -> Any:
        """Return the data or re-raise the task's exception."""
        if self.success:
            return self.data
        if self.exception is not None:
            raise self.exception
        raise RuntimeError(self.error or "Task failed")


def _call(target: Callable, *args) -> WorkerResult:
    try:
        return WorkerResult(success=True, data=target(*args))
    except Exception as e:
        return WorkerResult(success=False, error=str(e), exception=e)


class BackgroundWorker:
    """
    One background thread with cancellation.

    The target receives no arguments beyond `args`; it may poll
    `is_cancelled()` to stop early.
    """

    def __init__(self):
        self.thread: Optional[threading.Thread] = None
        self.status = WorkerStatus.IDLE
        self.cancel_flag = threading.Event()
        self.result_queue: queue.Queue = queue.Queue()

    def start(self,
              target: Callable,
              args: tuple = (),
              on_complete: Optional[Callable[[WorkerResult], None]] = None) -> None:
        """
        Start background operation.

        Args:
            target: Function to run in background
            args: Arguments for target function
            on_complete: Callback when complete (called from the worker thread)
        """
        if self.is_running():
            raise RuntimeError("Worker already running")

        self.status = WorkerStatus.RUNNING
        self.cancel_flag.clear()

        def worker_wrapper():
            result = _call(target, *args)
            if self.status != WorkerStatus.CANCELLED:
                self.status = WorkerStatus.COMPLETED if result.success else WorkerStatus.FAILED
            self.result_queue.put(result)
            if on_complete:
                on_complete(result)

        self.thread = threading.Thread(target=worker_wrapper, daemon=True)
        self.thread.start()

    def is_running(self) -> bool:
        return bool(self.status == WorkerStatus.RUNNING and self.thread and self.thread.is_alive())

    def cancel(self) -> None:
        """Request cancellation of current operation."""
        self.cancel_flag.set()
        self.status = WorkerStatus.CANCELLED

    def is_cancelled(self) -> bool:
        return self.cancel_flag.is_set()

    def wait(self, timeout: Optional[float] = None) -> Optional[WorkerResult]:
        """
        Wait for worker to complete.

        Returns:
            WorkerResult or None on timeout
        """
        if not self.thread:
            return None
        self.thread.join(timeout)
        try:
            return self.result_queue.get_nowait()
        except queue.Empty:
            return None


def default_workers() -> int:
    """Thread count from EIGENFLOW_THREADS, else the CPU count."""
    raw = os.environ.get("EIGENFLOW_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring invalid EIGENFLOW_THREADS={raw!r}")
    return os.cpu_count() or 1


class WorkerPool:
    """
    Fixed-size pool of BackgroundWorkers draining a shared task queue.

    numpy and LAPACK release the GIL, so threads give real overlap
    for the dense kernels.
    """

    def __init__(self, max_workers: int = 1):
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self.max_workers = max_workers
        self.workers: List[BackgroundWorker] = []

    def map_ordered(self, target: Callable, items: Iterable) -> List[WorkerResult]:
        """
        Apply target to every item; results come back in input order.

        A failing task yields a failed WorkerResult and does not stop
        the others.
        """
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1:
            return [_call(target, item) for item in items]

        tasks: queue.Queue = queue.Queue()
        for index, item in enumerate(items):
            tasks.put((index, item))
        results: List[Optional[WorkerResult]] = [None] * len(items)

        def drain(worker: BackgroundWorker):
            while not worker.is_cancelled():
                try:
                    index, item = tasks.get_nowait()
                except queue.Empty:
                    return
                results[index] = _call(target, item)

        self.workers = []
        for _ in range(min(self.max_workers, len(items))):
            worker = BackgroundWorker()
            self.workers.append(worker)
            worker.start(drain, (worker,))
        self.wait_all()

        return [
            r if r is not None else WorkerResult(success=False, error="Cancelled")
            for r in results
        ]

    def wait_all(self, timeout: Optional[float] = None) -> None:
        for worker in self.workers:
            worker.wait(timeout)
