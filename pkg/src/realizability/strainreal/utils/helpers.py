# src/realizability/strainreal/utils/helpers.py
import json
import math
import re
from pathlib import Path

import numpy as np


def ensure_dir(path: str):
    """Create directory structure if it doesn't exist"""
    if path:
        Path(path).mkdir(parents=True, exist_ok=True)


def slugify(s: str) -> str:
    """Convert string to a path-safe slug ('realize local' -> 'realize-local')"""
    s = (s or "").strip().lower()
    s = re.sub(r"[^a-z0-9\-_.]+", "-", s)
    s = re.sub(r"-{2,}", "-", s)
    return s.strip("-") or "unknown"


def parse_floats(text, count: int = None, name: str = "value") -> tuple:
    """'0,1,1,0' -> (0.0, 1.0, 1.0, 0.0); lists and tuples pass through"""
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = [p for p in str(text).replace(" ", "").split(",") if p != ""]
    try:
        values = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be comma-separated numbers, got '{text}'")
    if count is not None and len(values) != count:
        raise ValueError(f"{name} needs {count} comma-separated numbers, got {len(values)}")
    return values


def parse_range(text: str, name: str = "range") -> np.ndarray:
    """'a0:a1:steps' -> steps values evenly spaced from a0 to a1"""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"{name} must look like start:stop:steps, got '{text}'")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"{name} must look like start:stop:steps, got '{text}'")
    if steps < 1:
        raise ValueError(f"{name} needs at least one step, got {steps}")
    return np.linspace(start, stop, steps)


def sanitize_json(value):
    """Plain JSON types; NaN and infinities become None"""
    if isinstance(value, dict):
        return {str(k): sanitize_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize_json(v) for v in value]
    if isinstance(value, np.ndarray):
        return sanitize_json(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json_text(data) -> str:
    return json.dumps(sanitize_json(data), ensure_ascii=False, sort_keys=True, indent=2) + "\n"
