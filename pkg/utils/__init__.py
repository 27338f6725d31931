"""
Utils package
Provides logging, metrics, errors and the thread-pool helper
"""

from .logger import get_logger, set_run_id, clear_run_id, StructuredLogger
from .metrics import metrics_collector, timed_operation
from .errors import SorkinLabError
from .parallel import parallel_map

__all__ = [
    "get_logger",
    "set_run_id",
    "clear_run_id",
    "StructuredLogger",
    "metrics_collector",
    "timed_operation",
    "SorkinLabError",
    "parallel_map",
]
