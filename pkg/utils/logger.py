"""
Centralized Logging Configuration
Structured JSON logging with run IDs and numpy-aware extra fields
"""

import logging
import json
import sys
from typing import Any, Optional
from datetime import datetime, timezone
from contextvars import ContextVar

import numpy as np

from config import settings

# Context variable for the current experiment run
run_id_var: ContextVar[Optional[str]] = ContextVar('run_id', default=None)


def to_jsonable(data: Any) -> Any:
    """
    Recursively convert numpy values so log payloads serialize cleanly

    Complex numbers become [re, im] pairs.
    """
    if isinstance(data, dict):
        return {str(key): to_jsonable(value) for key, value in data.items()}
    elif isinstance(data, (list, tuple)):
        return [to_jsonable(item) for item in data]
    elif isinstance(data, np.ndarray):
        return to_jsonable(data.tolist())
    elif isinstance(data, (complex, np.complexfloating)):
        return [float(data.real), float(data.imag)]
    elif isinstance(data, np.generic):
        return data.item()
    else:
        return data


class StructuredFormatter(logging.Formatter):
    """
    Custom formatter for structured JSON logging
    """

    def format(self, record: logging.LogRecord) -> str:
        # Build structured log entry
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "module": record.name,
            "message": record.getMessage()
        }

        run_id = run_id_var.get()
        if run_id:
            log_entry["run_id"] = run_id

        # Add extra fields if present
        if hasattr(record, 'extra') and record.extra:
            log_entry["extra"] = to_jsonable(record.extra)

        # Add exception info if present
        if record.exc_info and settings.DEBUG:
            log_entry["exception"] = self.formatException(record.exc_info)

        if settings.LOG_FORMAT == "json":
            return json.dumps(log_entry, default=str)
        else:
            # Text format for human readability
            text = f"[{log_entry['timestamp']}] {log_entry['level']} - {log_entry['module']}"
            if run_id:
                text += f" [{run_id}]"
            text += f" - {log_entry['message']}"
            if 'extra' in log_entry:
                text += f" | {json.dumps(log_entry['extra'], default=str)}"
            return text


def setup_logging():
    """
    Configure centralized logging

    Logs go to stderr so CSV or JSON written to stdout stays clean.
    """
    log_level = logging.DEBUG if settings.DEBUG else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(StructuredFormatter())

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()
    root_logger.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance with the given name
    """
    return logging.getLogger(name)


def set_run_id(run_id: str):
    """
    Set run ID in context for the current experiment
    """
    run_id_var.set(run_id)


def clear_run_id():
    """
    Clear run ID from context
    """
    run_id_var.set(None)


class StructuredLogger(logging.LoggerAdapter):
    """
    Logger adapter that adds extra fields to all log messages
    """

    def process(self, msg, kwargs):
        extra = dict(kwargs.get('extra') or {})
        if self.extra:
            extra.update(self.extra)

        # Nest under 'extra' so the formatter finds it on the record
        kwargs['extra'] = {'extra': to_jsonable(extra)}
        return msg, kwargs


# Initialize logging on module import
setup_logging()
