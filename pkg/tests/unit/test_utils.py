"""
Unit tests for Logger, Metrics and error utilities
"""

import json
import logging

import numpy as np
import pytest

from utils.errors import InvalidConfigError, NontrivialitySearchError, ResummationDivergesError
from utils.logger import (
    StructuredFormatter,
    StructuredLogger,
    clear_run_id,
    get_logger,
    run_id_var,
    set_run_id,
    to_jsonable,
)
from utils.metrics import MetricsCollector, timed_operation
from utils.parallel import parallel_map


class TestJsonable:
    """numpy payloads in log extras"""

    def test_arrays_and_scalars(self):
        data = {"v": np.array([1.0, 2.0]), "n": np.int64(3), "ok": np.bool_(True)}
        assert to_jsonable(data) == {"v": [1.0, 2.0], "n": 3, "ok": True}

    def test_complex_becomes_pair(self):
        assert to_jsonable({"w": 0.25j}) == {"w": [0.0, 0.25]}
        assert to_jsonable(np.array([1 + 2j])) == [[1.0, 2.0]]

    def test_nested(self):
        assert to_jsonable({"rows": [(np.float64(0.5), "a")]}) == {"rows": [[0.5, "a"]]}


class TestLogger:
    """Test suite for logger functionality"""

    def test_get_logger(self):
        logger = get_logger("test_module")
        assert logger.name == "test_module"

    def test_run_id_context(self):
        assert run_id_var.get() is None
        set_run_id("run_test123")
        assert run_id_var.get() == "run_test123"
        clear_run_id()
        assert run_id_var.get() is None

    def test_json_format_carries_run_id(self, mock_settings):
        mock_settings.LOG_FORMAT = "json"
        record = logging.LogRecord("sorkinlab", logging.INFO, __file__, 1, "scan done", None, None)
        record.extra = {"gap": np.float64(0.5)}
        set_run_id("run_1")
        try:
            entry = json.loads(StructuredFormatter().format(record))
        finally:
            clear_run_id()
        assert entry["message"] == "scan done"
        assert entry["run_id"] == "run_1"
        assert entry["extra"] == {"gap": 0.5}

    def test_adapter_nests_fixed_fields(self):
        adapter = StructuredLogger(logging.getLogger("sorkinlab"), {"command": "deco"})
        _, kwargs = adapter.process("built", {"extra": {"cells": np.int64(1296)}})
        assert kwargs["extra"] == {"extra": {"cells": 1296, "command": "deco"}}

    def test_text_format(self, mock_settings):
        mock_settings.LOG_FORMAT = "text"
        record = logging.LogRecord("sorkinlab", logging.WARNING, __file__, 1, "slow", None, None)
        text = StructuredFormatter().format(record)
        assert "WARNING - sorkinlab - slow" in text


class TestMetricsCollector:
    """Test suite for metrics collection"""

    def test_record_operation(self, reset_metrics):
        reset_metrics.record_operation("chi_scan", "ok", 45.5)
        metrics = reset_metrics.get_metrics()
        assert metrics["total_operations"] == 1
        assert metrics["by_operation"]["chi_scan"] == 1
        assert metrics["by_status"]["ok"] == 1
        assert metrics["avg_duration_ms"] == 45.5

    def test_record_multiple_operations(self, reset_metrics):
        reset_metrics.record_operation("sj_modes", "ok", 10.0)
        reset_metrics.record_operation("fock_build", "SizeGuardError", 20.0)
        reset_metrics.record_operation("sj_modes", "ok", 30.0)
        metrics = reset_metrics.get_metrics()
        assert metrics["total_operations"] == 3
        assert metrics["by_operation"] == {"sj_modes": 2, "fock_build": 1}
        assert metrics["duration_ms_by_operation"]["sj_modes"] == 40.0
        assert metrics["avg_duration_ms"] == 20.0

    def test_reset(self):
        collector = MetricsCollector()
        collector.record_operation("x", "ok", 1.0)
        collector.reset()
        assert collector.get_metrics()["total_operations"] == 0


class TestTimedOperation:
    def test_success_is_recorded(self, reset_metrics):
        @timed_operation("double")
        def double(x):
            return 2 * x

        assert double(3) == 6
        assert reset_metrics.get_metrics()["by_status"] == {"ok": 1}

    def test_failure_records_exception_name(self, reset_metrics):
        @timed_operation("explode")
        def explode():
            raise ValueError("boom")

        with pytest.raises(ValueError):
            explode()
        assert reset_metrics.get_metrics()["by_status"] == {"ValueError": 1}


class TestParallelMap:
    @pytest.mark.parametrize("threads", [1, 4])
    def test_preserves_order(self, mock_settings, threads):
        mock_settings.SORKINLAB_THREADS = threads
        assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]

    def test_empty(self, mock_settings):
        mock_settings.SORKINLAB_THREADS = 4
        assert parallel_map(abs, []) == []


class TestErrorRecords:
    """Machine-readable error records for the CLI"""

    def test_details_are_flattened(self):
        record = ResummationDivergesError(spectral_radius=1.5, condition=1e12).to_record()
        assert record["error"] == "ResummationDivergesError"
        assert record["spectral_radius"] == 1.5
        assert "diverges" in record["message"]

    def test_invalid_config_lists_errors(self):
        err = InvalidConfigError("deco", ["a", "b"])
        assert err.to_record()["errors"] == ["a", "b"]
        assert err.message == "config rejected for deco: a; b"

    def test_nontriviality_profile_defaults_empty(self):
        assert NontrivialitySearchError("no witness").profile == []
