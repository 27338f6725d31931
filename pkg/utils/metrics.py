"""
Metrics Collection
Simple in-memory metrics for timing numerical operations
"""

from typing import Callable, Dict
from datetime import datetime, timezone
from functools import wraps
import threading
import time


class MetricsCollector:
    """
    Thread-safe in-memory metrics collector
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.operation_count = 0
        self.by_operation: Dict[str, int] = {}
        self.by_status: Dict[str, int] = {}
        self.duration_by_operation: Dict[str, float] = {}
        self.total_duration_ms = 0.0
        self.start_time = datetime.now(timezone.utc)

    def record_operation(
        self,
        operation: str,
        status: str,
        duration_ms: float
    ):
        """
        Record a completed operation
        """
        with self._lock:
            self.operation_count += 1
            self.by_operation[operation] = self.by_operation.get(operation, 0) + 1
            self.by_status[status] = self.by_status.get(status, 0) + 1
            self.duration_by_operation[operation] = (
                self.duration_by_operation.get(operation, 0.0) + duration_ms
            )
            self.total_duration_ms += duration_ms

    def get_metrics(self) -> Dict:
        """
        Get current metrics snapshot
        """
        with self._lock:
            uptime_seconds = (datetime.now(timezone.utc) - self.start_time).total_seconds()

            return {
                "total_operations": self.operation_count,
                "uptime_seconds": round(uptime_seconds, 2),
                "avg_duration_ms": round(
                    self.total_duration_ms / max(self.operation_count, 1),
                    3
                ),
                "by_operation": dict(self.by_operation),
                "by_status": dict(self.by_status),
                "duration_ms_by_operation": {
                    k: round(v, 3) for k, v in self.duration_by_operation.items()
                }
            }

    def reset(self):
        """
        Reset all metrics (useful for testing)
        """
        with self._lock:
            self.operation_count = 0
            self.by_operation.clear()
            self.by_status.clear()
            self.duration_by_operation.clear()
            self.total_duration_ms = 0.0
            self.start_time = datetime.now(timezone.utc)


# Global metrics collector instance
metrics_collector = MetricsCollector()


def timed_operation(name: str) -> Callable:
    """
    Decorator recording duration and outcome of a service call

    Status is "ok" on return and the exception class name on raise.
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            status = "ok"
            try:
                return func(*args, **kwargs)
            except Exception as e:
                status = type(e).__name__
                raise
            finally:
                duration_ms = (time.perf_counter() - start) * 1000.0
                metrics_collector.record_operation(name, status, duration_ms)
        return wrapper
    return decorator
