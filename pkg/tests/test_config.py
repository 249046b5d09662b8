import dataclasses
import json

import pytest

from borndetect.config import PRESETS, RunConfig, load_config, parse_config, preset_path
from borndetect.errors import ConfigError


def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.trials.n_trials >= 100_000
    assert cfg.wavepacket.span == 8.0


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    cfg = load_config(preset_path(name))
    assert isinstance(cfg, RunConfig)


def test_default_preset_matches_defaults():
    cfg = load_config(preset_path("born_default"))
    default = RunConfig()
    assert cfg.wavepacket.span == default.wavepacket.span
    assert dataclasses.replace(cfg.wavepacket, grid_span=None) == default.wavepacket
    for section in ("medium", "dynamics", "dephasing", "trials"):
        assert getattr(cfg, section) == getattr(default, section)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset_path("nope")


def test_missing_file_names_path(tmp_path):
    path = tmp_path / "absent.json"
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert str(path) in str(err.value)


def test_unknown_key_names_key_and_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "dynamics": {\n    "epsilon": 0.001,\n    "gama": 2.0\n  }\n}\n')
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert err.value.field == "dynamics.gama" and err.value.line == 4
    assert "gama" in str(err.value) and "line 4" in str(err.value)


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "trials": {\n    "n_trials": 10,\n  }\n}\n')
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert err.value.line == 4


def test_type_errors():
    with pytest.raises(ConfigError) as err:
        parse_config({"trials": {"n_trials": 1.5}})
    assert err.value.field == "trials.n_trials"
    with pytest.raises(ConfigError):
        parse_config({"dynamics": {"gamma": "big"}})
    with pytest.raises(ConfigError):
        parse_config({"medium": []})


def test_validation_errors_name_field():
    text = json.dumps({"dephasing": {"diffusion_variant": "other"}}, indent=2)
    with pytest.raises(ConfigError) as err:
        parse_config(json.loads(text), text)
    assert err.value.field == "dephasing.diffusion_variant" and err.value.line == 3
    with pytest.raises(ConfigError):
        parse_config({"medium": {"count_law": "fixed"}})
    with pytest.raises(ConfigError):
        parse_config({"medium": {"extent": [1.0, 0.0]}})
    with pytest.raises(ConfigError):
        parse_config({"experiments": {"transverse_scale": {"widths": [1.0]}}})


def test_partial_config_keeps_defaults():
    cfg = parse_config({"trials": {"n_trials": 10}})
    assert cfg.trials.n_trials == 10 and cfg.dynamics == RunConfig().dynamics
    assert cfg.to_dict()["trials"]["n_trials"] == 10
