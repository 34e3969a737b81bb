import json

import pytest

from haneat.activation import ActivationKind
from haneat.config import EvolutionConfig, Settings, load_config_file, split_overrides
from haneat.errors import ConfigError


def test_defaults():
    cfg = EvolutionConfig()
    assert (cfg.population_size, cfg.max_generations) == (100, 3000)
    assert (cfg.p_add_node, cfg.p_add_connection, cfg.p_mutate_activation) == (0.01, 0.30, 0.20)
    assert (cfg.c_excess, cfg.c_disjoint, cfg.c_weight) == (1.0, 1.0, 0.2)
    assert cfg.dropoff_age == 15
    assert len(cfg.catalog) == 4
    assert cfg.validate() is cfg


def test_with_overrides_coerces_text():
    cfg = EvolutionConfig().with_overrides(
        population_size="40", p_mutate_activation="0.5", debug_checks="yes", catalog="relu, gaussian"
    )
    assert cfg.population_size == 40
    assert cfg.p_mutate_activation == 0.5
    assert cfg.debug_checks is True
    assert cfg.catalog == (ActivationKind.RELU, ActivationKind.GAUSSIAN)


@pytest.mark.parametrize(
    "overrides",
    [
        {"p_add_node": 1.5},
        {"population_size": 1},
        {"population_size": 2.5},
        {"classification_fitness": "hinge"},
        {"catalog": "linear"},
        {"threshold_floor": 0},
        {"unknown_knob": 1},
    ],
)
def test_invalid_overrides(overrides):
    with pytest.raises(ConfigError):
        EvolutionConfig().with_overrides(**overrides)


def test_config_file_split(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"population_size": 30, "dataset": "engine", "catalog": ["step", "relu"]}))
    evolution, spec = load_config_file(path)
    assert evolution == {"population_size": 30, "catalog": (ActivationKind.STEP, ActivationKind.RELU)}
    assert spec == {"dataset": "engine"}


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", json.dumps({"mystery": 1}), json.dumps({"seed": {"a": 1}})])
def test_bad_config_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "absent.json")


def test_evolution_key_is_not_a_flat_override():
    with pytest.raises(ConfigError):
        split_overrides({"evolution": 1})


@pytest.mark.parametrize("value", [3, 1.5, True])
def test_optional_text_keys_reject_non_strings(value):
    with pytest.raises(ConfigError, match="activation"):
        split_overrides({"mode": "homogeneous", "activation": value})


def test_settings_read_list_env(monkeypatch):
    monkeypatch.setenv("HANEAT_MCP_API_KEYS", "alpha, beta,")
    monkeypatch.setenv("HANEAT_ALLOWED_ORIGINS", "https://a.example")
    current = Settings()
    assert current.mcp_api_keys == ["alpha", "beta"]
    assert current.allowed_origins == ["https://a.example"]
