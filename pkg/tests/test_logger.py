"""
Tests for logging utilities.
"""

import pytest

from mvnmf.utils.logger import LogTimer, get_logger, setup_logger


def test_setup_logger():
    """Test logger setup."""
    setup_logger(log_level="DEBUG")
    logger = get_logger(__name__)

    assert logger is not None


def test_setup_logger_reconfigures_level():
    """Test switching levels after the first setup."""
    setup_logger(log_level="DEBUG")
    setup_logger(log_level="WARNING")

    assert get_logger("test_module") is not None


def test_log_timer_measures_duration():
    """Test LogTimer context manager."""
    logger = get_logger(__name__)

    with LogTimer("test operation", logger) as timer:
        sum(range(1000))

    assert timer.duration >= 0.0


def test_log_timer_with_exception():
    """Test LogTimer does not suppress exceptions."""
    logger = get_logger(__name__)

    with pytest.raises(ValueError):
        with LogTimer("failing operation", logger):
            raise ValueError("Test error")
