"""Settings: config file parsing and environment overrides."""

import pytest

from datachat.config import Settings


def test_defaults_are_desk_scale():
    settings = Settings()
    assert settings.row_cap == 10_000
    assert settings.default_limit == 10_000
    assert settings.statement_deadline_ms == 30_000
    assert settings.max_repair_retries == 2
    assert settings.trend_r2_threshold == 0.5
    assert settings.anomaly_score_threshold == 3.5
    assert settings.correlation_r_threshold == 0.7


def test_config_file_round_trip(tmp_path):
    config = tmp_path / "app.conf"
    config.write_text(
        "# limits\n"
        "row_cap = 500\n"
        "statement_deadline_ms = 1500\n"
        "trend_r2_threshold = 0.75\n"
        "storage_dir = \"/tmp/sessions\"\n"
        "api_token = 'abc'\n"
    )
    settings = Settings.from_file(config)
    assert settings.row_cap == 500
    assert settings.statement_deadline_ms == 1500
    assert settings.trend_r2_threshold == 0.75
    assert settings.storage_dir == "/tmp/sessions"
    assert settings.api_token == "abc"
    assert settings.default_limit == 10_000  # untouched default


def test_unknown_key_rejected(tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("surprise = 1\n")
    with pytest.raises(ValueError):
        Settings.from_file(config)


def test_malformed_line_rejected(tmp_path):
    config = tmp_path / "bad2.conf"
    config.write_text("just some words\n")
    with pytest.raises(ValueError):
        Settings.from_file(config)


def test_env_overrides_provider_endpoints():
    settings = Settings().with_env_overrides({
        "MODEL_ENDPOINT": "https://model.example/v1",
        "MODEL_KEY": "k1",
        "SEARCH_ENDPOINT": "https://search.example/v1",
        "SEARCH_KEY": "k2",
    })
    assert settings.model_endpoint == "https://model.example/v1"
    assert settings.model_key == "k1"
    assert settings.search_endpoint == "https://search.example/v1"
    assert settings.search_key == "k2"
    untouched = Settings().with_env_overrides({})
    assert untouched.model_endpoint == ""
