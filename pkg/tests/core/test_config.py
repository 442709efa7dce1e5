"""Settings defaults and settings-file overrides."""
import pytest
from pydantic import ValidationError

from config import DEFAULT_SETTINGS, Settings, load_settings
from errors import InputError
from log_utils import LogLevel


def test_defaults():
    assert DEFAULT_SETTINGS.rel_tolerance == 1e-9
    assert DEFAULT_SETTINGS.abs_tolerance == 1e-12
    assert DEFAULT_SETTINGS.bump_grid_divisor == 512
    assert DEFAULT_SETTINGS.hill_climb_steps == 200
    assert DEFAULT_SETTINGS.hill_climb_restarts == 8
    assert DEFAULT_SETTINGS.log_level is LogLevel.WARNING
    assert load_settings() is DEFAULT_SETTINGS


def test_within_bound():
    assert DEFAULT_SETTINGS.within_bound(1.0, 1.0)
    assert DEFAULT_SETTINGS.within_bound(1.0 + 5e-10, 1.0)
    assert DEFAULT_SETTINGS.within_bound(5e-13, 0.0)
    assert not DEFAULT_SETTINGS.within_bound(1.0, 0.0)
    assert not DEFAULT_SETTINGS.within_bound(1.0 + 1e-6, 1.0)


def test_file_overrides(tmp_path):
    path = tmp_path / "settings.env"
    path.write_text("# numeric policy\nREL_TOLERANCE=1e-6\nHILL_CLIMB_STEPS=50\nLOG_LEVEL=DEBUG\n",
                    encoding="utf-8")
    settings = load_settings(path)
    assert settings.rel_tolerance == 1e-6
    assert settings.hill_climb_steps == 50
    assert settings.log_level is LogLevel.DEBUG
    assert settings.abs_tolerance == DEFAULT_SETTINGS.abs_tolerance


@pytest.mark.parametrize("content", [
    "REL_TOLERANCE=-1\n",
    "BUMP_GRID_DIVISOR=4\n",
    "COLOUR=blue\n",
    "LOG_LEVEL=LOUD\n",
])
def test_invalid_overrides(tmp_path, content):
    path = tmp_path / "settings.env"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(InputError):
        load_settings(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_settings(tmp_path / "absent.env")


def test_settings_are_frozen():
    with pytest.raises(ValidationError):
        DEFAULT_SETTINGS.rel_tolerance = 1.0
    assert Settings(batch_size=16).batch_size == 16
