import json

import pytest

from rcga.experiments.config import CONFIG_ENV, ROOT_CONFIG_NAME, load_config


@pytest.fixture
def isolated(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_packaged_defaults(isolated):
    cfg = load_config()
    assert cfg["max_iterations"] == 10**7
    assert cfg["verify_n"] == [10, 50, 100]
    assert cfg["threads"] == 1


def test_root_config_overrides_packaged_defaults(isolated):
    (isolated / ROOT_CONFIG_NAME).write_text(json.dumps({"threads": 4}), encoding="utf-8")
    assert load_config()["threads"] == 4


def test_env_config_wins_and_flag_spellings_are_normalized(isolated, monkeypatch):
    (isolated / ROOT_CONFIG_NAME).write_text(json.dumps({"threads": 4}), encoding="utf-8")
    env_file = isolated / "env.json"
    env_file.write_text(json.dumps({"max-iters": 5, "seed": 9, "colour": "red"}), encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV, str(env_file))
    cfg = load_config()
    assert cfg["max_iterations"] == 5
    assert cfg["base_seed"] == 9
    assert cfg["threads"] == 1
    assert "colour" not in cfg


def test_explicit_path_is_layered_on_top(isolated):
    extra = isolated / "extra.json"
    extra.write_text(json.dumps({"replications": 3}), encoding="utf-8")
    cfg = load_config(extra)
    assert cfg["replications"] == 3
    assert cfg["max_iterations"] == 10**7


def test_unreadable_explicit_path_raises(isolated):
    with pytest.raises(RuntimeError):
        load_config(isolated / "missing.json")


def test_unreadable_discovered_config_falls_back(isolated, caplog):
    (isolated / ROOT_CONFIG_NAME).write_text("{not json", encoding="utf-8")
    cfg = load_config()
    assert cfg["replications"] == 100
    assert "unreadable config" in caplog.text
