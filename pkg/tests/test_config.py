import json

import pytest

from ahlab.config import DEFAULT_CONFIG, load_config, validate
from ahlab.errors import ConfigError


def test_default_is_valid():
    assert validate(load_config(None)) == DEFAULT_CONFIG


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="geometry"):
        validate(dict(DEFAULT_CONFIG, geometry={"x1": 1.0, "d": 0.1, "N": 10, "M": 3}))
    with pytest.raises(ConfigError):
        validate(dict(DEFAULT_CONFIG, extra={}))
    with pytest.raises(ConfigError):
        validate(dict(DEFAULT_CONFIG, run={"colour": "red"}))


def test_types_and_enums():
    with pytest.raises(ConfigError):
        validate(dict(DEFAULT_CONFIG, potential={"kind": "gaussian"}))
    with pytest.raises(ConfigError):
        validate(dict(DEFAULT_CONFIG, run={"times": {"start": 0, "stop": 1}}))
    with pytest.raises(ConfigError):
        validate(dict(DEFAULT_CONFIG, run={"max_order": 5}))
    validate(dict(DEFAULT_CONFIG, run={"times": {"start": 0, "stop": 1, "num": 3},
                                       "observable": "gaussianity"}))


def test_load_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(DEFAULT_CONFIG))
    assert load_config(path) == DEFAULT_CONFIG
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
