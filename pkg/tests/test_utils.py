import json

import numpy as np
import pytest

from scenariopac.errors import InputError
from scenariopac.models import ErrorRow, TailProfile
from scenariopac.utils import debug_enabled, debug_log, dumps, env_int, load_json_config


class TestDumps:
    def test_numpy_values(self):
        assert json.loads(dumps({"a": np.float64(0.5), "b": np.arange(3)})) == {"a": 0.5, "b": [0, 1, 2]}

    def test_dataclass(self):
        row = ErrorRow(d=1, N=10, mean_error=0.1, std_error=0.0, replicates=2, seed=0)
        assert json.loads(dumps(row))["N"] == 10

    def test_hidden_fields_skipped(self):
        profile = TailProfile(0.5, np.zeros((2, 1)), np.zeros(2), 0.0, 10, 0, 0.0, "optimum")
        assert "grid" not in json.loads(dumps(profile))


class TestLoadJsonConfig:
    def test_hyphens_normalised(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"mc-samples": 500, "seed": 3}')
        assert load_json_config(path) == {"mc_samples": 500, "seed": 3}

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{nope")
        with pytest.raises(InputError, match="invalid JSON"):
            load_json_config(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("[1, 2]")
        with pytest.raises(InputError, match="JSON object"):
            load_json_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_json_config(tmp_path / "absent.json")


class TestEnvInt:
    def test_unset(self, monkeypatch):
        monkeypatch.delenv("SCENARIOPAC_SEED", raising=False)
        assert env_int("SCENARIOPAC_SEED") is None

    def test_blank(self, monkeypatch):
        monkeypatch.setenv("SCENARIOPAC_SEED", "  ")
        assert env_int("SCENARIOPAC_SEED") is None

    def test_value(self, monkeypatch):
        monkeypatch.setenv("SCENARIOPAC_SEED", "42")
        assert env_int("SCENARIOPAC_SEED") == 42

    def test_garbage(self, monkeypatch):
        monkeypatch.setenv("SCENARIOPAC_SEED", "abc")
        with pytest.raises(InputError, match="SCENARIOPAC_SEED"):
            env_int("SCENARIOPAC_SEED")


class TestDebugLog:
    def test_silent_by_default(self, monkeypatch, capsys):
        monkeypatch.delenv("DEBUG", raising=False)
        debug_log("Title", {"a": 1})
        captured = capsys.readouterr()
        assert captured.err == ""
        assert debug_enabled() is False

    def test_enabled(self, monkeypatch):
        monkeypatch.setenv("DEBUG", "true")
        assert debug_enabled() is True
