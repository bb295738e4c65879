# src/realizability/strainreal/utils/config_loader.py
import json

from ..configs.settings import PRESETS_PATH
from ..errors import UsageError


def _read_json(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise UsageError(f"{what} {path} not found\nMake sure the file exists.")
    except json.JSONDecodeError as e:
        raise UsageError(f"Error parsing JSON in {path}: {e}\nCheck that the file contains valid JSON.")


def load_run_config(path: str) -> dict:
    """
    Load flag values from a JSON object whose keys are flag destinations

    Args:
        path: Path to the run-config JSON file

    Returns:
        Dictionary of flag values (keys such as "stream", "radius", "nx")

    Raises:
        UsageError: If the file is missing, malformed or not a JSON object
    """
    data = _read_json(path, "Run config")
    if not isinstance(data, dict):
        raise UsageError(f"Run config {path} must contain a JSON object, got {type(data).__name__}")
    return data


def load_presets(path: str = None) -> dict:
    data = _read_json(path or str(PRESETS_PATH), "Presets file")
    presets = data.get("presets", {}) if isinstance(data, dict) else {}
    if not presets:
        print(f"Warning: No presets found in {path or PRESETS_PATH}")
    return presets


def get_preset(name: str, path: str = None) -> dict:
    presets = load_presets(path)
    if name not in presets:
        raise UsageError(f"Unknown preset '{name}'\nAvailable presets: {', '.join(sorted(presets))}")
    preset = presets[name]
    if "command" not in preset:
        raise UsageError(f"Preset '{name}' does not name a command")
    return preset
