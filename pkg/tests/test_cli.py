import json

import numpy as np
import pytest

from src.realizability.strainreal.cli.argument_parser import (
    COMMANDS,
    RunConfig,
    explicit_parameters,
    parse_arguments,
    resolve_parameters,
)
from src.realizability.strainreal.configs import settings
from src.realizability.strainreal.errors import UsageError
from src.realizability.strainreal.utils.config_loader import get_preset, load_presets, load_run_config
from src.realizability.strainreal.utils.helpers import (
    parse_floats,
    parse_range,
    sanitize_json,
    slugify,
    to_json_text,
)


# ---------- settings ----------

def test__threads__default_and_validation(monkeypatch):
    monkeypatch.delenv("STRAINREAL_THREADS", raising=False)
    assert settings.threads() == 1
    monkeypatch.setenv("STRAINREAL_THREADS", "4")
    assert settings.threads() == 4
    for raw in ("0", "-2", "four"):
        monkeypatch.setenv("STRAINREAL_THREADS", raw)
        with pytest.raises(ValueError, match="STRAINREAL_THREADS"):
            settings.threads()


def test__log_level__normalized_and_checked(monkeypatch):
    monkeypatch.delenv("STRAINREAL_LOG_LEVEL", raising=False)
    assert settings.log_level() == "INFO"
    monkeypatch.setenv("STRAINREAL_LOG_LEVEL", "debug")
    assert settings.log_level() == "DEBUG"
    monkeypatch.setenv("STRAINREAL_LOG_LEVEL", "loud")
    with pytest.raises(ValueError):
        settings.log_level()


def test__storage_mode_and_out_dir(monkeypatch):
    monkeypatch.delenv("AWS_S3_BUCKET_NAME", raising=False)
    monkeypatch.delenv("STRAINREAL_OUT_DIR", raising=False)
    assert settings.storage_mode() == "local"
    assert settings.out_dir() == "./artifacts"
    monkeypatch.setenv("AWS_S3_BUCKET_NAME", "realizability-runs")
    monkeypatch.setenv("STRAINREAL_OUT_DIR", "/tmp/runs")
    assert settings.storage_mode() == "s3"
    assert settings.out_dir() == "/tmp/runs"


# ---------- helpers ----------

def test__slugify():
    assert slugify("realize local") == "realize-local"
    assert slugify("Casebook  Vanishing!") == "casebook-vanishing"
    assert slugify("") == "unknown"


def test__parse_floats():
    assert parse_floats("0, 1,1,0", 4) == (0.0, 1.0, 1.0, 0.0)
    assert parse_floats([1, 2], 2) == (1.0, 2.0)
    with pytest.raises(ValueError, match="needs 4"):
        parse_floats("0,1,1", 4)
    with pytest.raises(ValueError):
        parse_floats("a,b")


def test__parse_range():
    assert np.allclose(parse_range("0:1:3"), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        parse_range("0:1")
    with pytest.raises(ValueError):
        parse_range("0:1:0")


def test__to_json_text__sorted_with_nulls():
    data = {"b": np.float64(np.nan), "a": [np.int64(1), float("inf")], "c": np.array([True])}
    assert sanitize_json(data) == {"a": [1, None], "b": None, "c": [True]}
    assert to_json_text({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'


# ---------- config files and presets ----------

def test__load_run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"stream": "x*y", "nx": 33}))
    assert load_run_config(str(path)) == {"stream": "x*y", "nx": 33}


@pytest.mark.parametrize("content", ["[1, 2]", "{not json"])
def test__load_run_config__rejects_bad_files(tmp_path, content):
    path = tmp_path / "run.json"
    path.write_text(content)
    with pytest.raises(UsageError):
        load_run_config(str(path))


def test__load_run_config__missing_file(tmp_path):
    with pytest.raises(UsageError, match="not found"):
        load_run_config(str(tmp_path / "absent.json"))


def test__presets__every_preset_resolves():
    presets = load_presets()
    assert "local-worked" in presets
    for name, preset in presets.items():
        params = resolve_parameters(preset["command"], {}, preset=preset["params"])
        assert params, name


def test__get_preset__unknown_name():
    assert get_preset("laminate-realizable")["command"] == "laminate check"
    with pytest.raises(UsageError, match="Available presets"):
        get_preset("no-such-preset")


# ---------- argument parsing ----------

def test__resolve_parameters__precedence():
    preset = {"stream": "x*y", "nx": 17, "radius": 0.5}
    config = {"nx": 33}
    params = resolve_parameters("realize local", {"radius": 0.25}, config, preset)
    assert params["stream"] == "x*y"
    assert params["nx"] == 33
    assert params["radius"] == 0.25
    assert params["center"] == COMMANDS["realize local"][0]["center"]


def test__resolve_parameters__rejects_unknown_and_missing_keys():
    with pytest.raises(UsageError, match="nx"):
        resolve_parameters("laminate check", {}, {"E1": "0,1,1,0", "nx": 3})
    with pytest.raises(UsageError, match="--xi"):
        resolve_parameters("laminate check", {"E1": "0,1,1,0", "E2": "0,2,2,0"})
    with pytest.raises(UsageError):
        resolve_parameters("transmute", {})


def test__parse_arguments__explicit_flags_only():
    args, preset = parse_arguments(["realize", "local", "--stream", "x*y", "--nx", "33"])
    assert preset is None
    assert args.command == "realize local"
    assert explicit_parameters(args) == {"nx": 33, "stream": "x*y"}


def test__parse_arguments__preset_supplies_the_command():
    args, preset = parse_arguments(["--preset", "laminate-obstructed"], presets_lookup=get_preset)
    assert args.command == "laminate check"
    assert preset["params"]["E2"] == "0,-1,-1,0"


def test__parse_arguments__preset_for_another_command():
    with pytest.raises(UsageError, match="not 'fields'"):
        parse_arguments(["--preset", "laminate-obstructed", "fields", "--stream", "x"], presets_lookup=get_preset)


def test__parse_arguments__usage_errors():
    with pytest.raises(UsageError):
        parse_arguments(["laminate", "check", "--bogus", "1"])
    with pytest.raises(UsageError, match="command is required"):
        parse_arguments([])


def test__run_config__echo_is_sorted():
    config = RunConfig("verify", {"stream": "x*y", "mu": "1"}, "./artifacts", seed=7)
    echo = config.to_dict()
    assert list(echo["params"]) == ["mu", "stream"]
    assert echo["seed"] == 7
    assert "output_dir" not in echo
