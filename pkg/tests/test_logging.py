"""Tests for structured logging."""
import logging

from spectral_tori.logging import add_run_id, add_service_info, configure_logging, run_id_var, set_run_id


class TestRunId:
    """Tests for the run id attached to events."""

    def test_set_and_attach(self):
        """Should attach the run id set in context."""
        token = run_id_var.set(None)
        try:
            assert set_run_id("abc12345") == "abc12345"
            assert add_run_id(logging.getLogger(), "info", {"event": "x"})["run_id"] == "abc12345"
        finally:
            run_id_var.reset(token)

    def test_generated(self):
        """Should generate an eight character id when none is given."""
        token = run_id_var.set(None)
        try:
            assert len(set_run_id()) == 8
        finally:
            run_id_var.reset(token)

    def test_absent(self):
        """Should leave events alone without a run id."""
        token = run_id_var.set(None)
        try:
            assert "run_id" not in add_run_id(logging.getLogger(), "info", {"event": "x"})
        finally:
            run_id_var.reset(token)


class TestConfigureLogging:
    """Tests for the logging setup."""

    def test_service_info(self):
        """Should stamp the package name on events."""
        assert add_service_info(logging.getLogger(), "info", {})["service"] == "spectral-tori"

    def test_single_handler_and_untouched_libraries(self):
        """Should install one stderr handler and leave other loggers at their defaults."""
        configure_logging()
        root = logging.getLogger()
        assert len(root.handlers) == 1
        assert root.level == logging.DEBUG
        assert logging.getLogger("matplotlib").level == logging.NOTSET
