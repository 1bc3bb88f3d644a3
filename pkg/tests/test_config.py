"""Tests for application settings."""

import pytest
from pydantic import ValidationError

from app.config import Settings, get_settings


class TestSettings:
    """Tests for Settings."""

    def test_defaults(self, settings: Settings) -> None:
        """Test the numerical defaults."""
        assert settings.tol == 1e-14
        assert settings.nmax == 100_000
        assert settings.bm_depth == 0
        assert settings.tail == "plus"
        assert settings.truncation == 20
        assert settings.pivot_tol == 1e-13
        assert settings.instability_guard == 1e-6
        assert settings.floor_tol == 1e-8
        assert settings.hyp_tol == 1e-15
        assert settings.hyp_nmax == 1_000_000

    def test_environment_override(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test JACOBIGREEN_-prefixed environment variables."""
        monkeypatch.setenv("JACOBIGREEN_TOL", "1e-10")
        monkeypatch.setenv("JACOBIGREEN_BM_DEPTH", "3")
        monkeypatch.setenv("jacobigreen_tail", "minus")
        settings = Settings(_env_file=None)
        assert settings.tol == 1e-10
        assert settings.bm_depth == 3
        assert settings.tail == "minus"

    @pytest.mark.parametrize(
        "overrides",
        [
            {"tol": 0.0},
            {"table_tol": -1.0},
            {"floor_tol": 0.0},
            {"nmax": 1},
            {"bm_depth": -1},
            {"tail": "sideways"},
            {"hyp_tol": -1e-15},
            {"hyp_nmax": 0},
        ],
    )
    def test_invalid_values(self, overrides: dict[str, object]) -> None:
        """Test that invalid numerical settings are rejected."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **overrides)

    def test_log_level_normalized(self) -> None:
        """Test that level names are upper-cased."""
        assert Settings(_env_file=None, log_level="debug").log_level == "DEBUG"

    def test_cached(self) -> None:
        """Test that get_settings returns one shared instance."""
        assert get_settings() is get_settings()
