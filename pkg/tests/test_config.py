#!/usr/bin/env python3
"""
Tests for environment settings, degree windows and range parsing
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules import linalg
from yoneda_workbench.modules.bar import bar
from yoneda_workbench.modules.config import Settings, Window, get_settings, parse_range
from yoneda_workbench.modules.errors import NoSolution, WorkbenchError
from yoneda_workbench.modules.linalg import FieldSpec


@pytest.fixture
def fresh_settings():
    """Drop the cached settings before and after the test"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.mark.unit
class TestSettings:
    """Test reading YW_* variables"""

    def test_defaults(self, monkeypatch):
        """Unset variables fall back to the defaults"""
        for name in ("YW_WINDOW_LO", "YW_MAX_STAGE", "YW_DEBUG_CHECKS", "YW_LOG_LEVEL"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings.from_env()
        assert settings.window_lo == -4
        assert settings.max_stage == 10
        assert settings.debug_checks is False
        assert settings.log_level == "INFO"

    def test_overrides(self, monkeypatch):
        """Variables override defaults and are normalized"""
        monkeypatch.setenv("YW_WINDOW_LO", "-2")
        monkeypatch.setenv("YW_STABILIZATION_COUNT", "5")
        monkeypatch.setenv("YW_DEBUG_CHECKS", "yes")
        monkeypatch.setenv("YW_LOG_LEVEL", "debug")
        settings = Settings.from_env()
        assert settings.window_lo == -2
        assert settings.stabilization_count == 5
        assert settings.debug_checks is True
        assert settings.log_level == "DEBUG"

    def test_invalid_value(self, monkeypatch):
        """Non-numeric values are reported as workbench errors"""
        monkeypatch.setenv("YW_MAX_STAGE", "many")
        with pytest.raises(WorkbenchError):
            Settings.from_env()

    def test_cached(self, fresh_settings):
        """get_settings reads the environment once"""
        assert get_settings() is get_settings()

    def test_debug_checks_validate_constructions(self, monkeypatch, fresh_settings, dual_numbers):
        """With YW_DEBUG_CHECKS set every bar tensor is validated as it is built"""
        monkeypatch.setenv("YW_DEBUG_CHECKS", "1")
        assert get_settings().debug_checks
        assert bar(dual_numbers, 2).dim(-2) == 4

    def test_debug_checks_verify_solutions(self, monkeypatch, fresh_settings, mocker):
        """With YW_DEBUG_CHECKS set, solve multiplies its answer back and rejects a mismatch"""
        f2 = FieldSpec(2)
        m, b = f2.array([[1, 0], [0, 1]]), f2.array([1, 1])
        mocker.patch.object(FieldSpec, "matmul", return_value=np.zeros((2, 1), dtype=np.int64))
        monkeypatch.setenv("YW_DEBUG_CHECKS", "0")
        assert np.array_equal(linalg.solve(f2, m, b), [1, 1])
        get_settings.cache_clear()
        monkeypatch.setenv("YW_DEBUG_CHECKS", "1")
        with pytest.raises(NoSolution, match="verification"):
            linalg.solve(f2, m, b)
        assert np.array_equal(linalg.solve(f2, m, b, check=False), [1, 1])


@pytest.mark.unit
class TestWindow:
    """Test degree windows"""

    def test_from_settings(self):
        """Window bounds come from the settings"""
        w = Window.from_settings(Settings(window_lo=-1, window_hi=2, stabilization_count=2, max_stage=7))
        assert list(w.degrees) == [-1, 0, 1, 2]
        assert (w.stabilization_count, w.max_stage, w.bar_cap) == (2, 7, None)

    def test_with_range(self):
        """Replacing the range keeps the other parameters"""
        w = Window(stabilization_count=4).with_range(0, 1)
        assert (w.lo, w.hi, w.stabilization_count) == (0, 1, 4)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lo": 2, "hi": 1},
            {"stabilization_count": 0},
            {"max_stage": -1},
            {"bar_cap": -2},
        ],
    )
    def test_rejects_bad_parameters(self, kwargs):
        """Empty windows and negative counts are rejected"""
        with pytest.raises(WorkbenchError):
            Window(**kwargs)


@pytest.mark.unit
class TestParseRange:
    """Test lo..hi parsing"""

    def test_negative_bounds(self):
        """Both bounds may be negative"""
        assert parse_range("-3..-1") == (-3, -1)
        assert parse_range("0..0") == (0, 0)

    @pytest.mark.parametrize("text", ["3..1", "1-3", "a..b", "1..2..3"])
    def test_rejects(self, text):
        """Malformed and empty ranges are errors"""
        with pytest.raises(WorkbenchError):
            parse_range(text)
