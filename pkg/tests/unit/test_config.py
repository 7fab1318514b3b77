"""
Unit tests para TrainConfig y presets.
"""

import json

import pytest
from pydantic import ValidationError

from app.core.config import (
    SEED_ENV_VAR,
    AcceptanceTrainConfig,
    IdxSpec,
    QuickTrainConfig,
    SynthSpec,
    TrainConfig,
)
from app.core.dataset import SynthRule
from app.core.exceptions import ConfigError


@pytest.fixture
def clean_env(tmp_path, monkeypatch):
    """Directorio sin .env y sin HYBRIDZX_SEED."""
    monkeypatch.chdir(tmp_path)
    # registrada para que monkeypatch la restaure al terminar
    monkeypatch.setenv(SEED_ENV_VAR, "")
    monkeypatch.delenv(SEED_ENV_VAR)
    return tmp_path


class TestTrainConfig:
    """Tests para defaults y validadores."""

    def test_defaults(self):
        config = TrainConfig()
        assert config.seed == 0
        assert config.learning_rate == 0.05
        assert config.iterations == 500
        assert config.fd_step == 1e-4
        assert config.stop_at_accuracy is None
        assert config.synth.rule == SynthRule.SINGLE_BIT

    @pytest.mark.parametrize("field,value", [
        ("learning_rate", 0.0),
        ("fd_step", -1e-3),
        ("iterations", 0),
        ("layers", 0),
        ("stop_at_accuracy", 0.0),
        ("stop_at_accuracy", 1.5),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ValidationError, match=field):
            TrainConfig(**{field: value})

    def test_extra_field_rejected(self):
        with pytest.raises(ValidationError):
            TrainConfig(epochs=3)

    def test_synth_bounds(self):
        with pytest.raises(ValidationError):
            SynthSpec(bits=9)
        with pytest.raises(ValidationError):
            SynthSpec(n=0)

    def test_idx_spec(self):
        """Test que side² no puede pasar de 8 bits."""
        spec = IdxSpec(images="a", labels="b")
        assert spec.classes == (3, 6)
        assert spec.side == 2
        with pytest.raises(ValidationError):
            IdxSpec(images="a", labels="b", side=3)
        with pytest.raises(ValidationError):
            IdxSpec(images="a", labels="b", threshold=1.2)


class TestPresets:
    """Tests para los presets."""

    def test_quick(self):
        config = QuickTrainConfig()
        assert config.iterations == 100
        assert (config.synth.bits, config.synth.n) == (2, 16)

    def test_acceptance(self):
        config = AcceptanceTrainConfig()
        assert config.learning_rate == 0.1
        assert config.stop_at_accuracy == 0.9
        assert (config.synth.bits, config.synth.n) == (4, 32)
        assert config.synth.rule == SynthRule.SINGLE_BIT

    def test_presets_are_train_configs(self):
        assert isinstance(AcceptanceTrainConfig(), TrainConfig)


class TestFromFile:
    """Tests para carga desde JSON y override de entorno."""

    def test_load(self, clean_env):
        path = clean_env / "train.json"
        path.write_text(json.dumps({"seed": 7, "synth": {"bits": 3, "rule": "parity", "n": 10}}))
        config = TrainConfig.from_file(path)
        assert config.seed == 7
        assert config.synth.rule == SynthRule.PARITY

    def test_invalid_json(self, clean_env):
        path = clean_env / "bad.json"
        path.write_text('{"seed": }')
        with pytest.raises(ConfigError, match="línea 1"):
            TrainConfig.from_file(path)

    def test_out_of_range(self, clean_env):
        """Test que el error nombra el campo anidado."""
        path = clean_env / "bad.json"
        path.write_text(json.dumps({"synth": {"bits": 20}}))
        with pytest.raises(ConfigError, match="synth.bits"):
            TrainConfig.from_file(path)

    def test_env_override(self, clean_env, monkeypatch):
        path = clean_env / "train.json"
        path.write_text(json.dumps({"seed": 7}))
        monkeypatch.setenv(SEED_ENV_VAR, "42")
        assert TrainConfig.from_file(path).seed == 42
        assert TrainConfig.from_file(path, env=False).seed == 7

    def test_dotenv_file(self, clean_env):
        """Test que HYBRIDZX_SEED también se lee desde .env."""
        (clean_env / ".env").write_text(f"{SEED_ENV_VAR}=11\n")
        assert TrainConfig().with_env_overrides().seed == 11

    def test_env_not_integer(self, clean_env, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "abc")
        with pytest.raises(ConfigError, match=SEED_ENV_VAR):
            TrainConfig().with_env_overrides()
