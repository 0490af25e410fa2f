"""
Helpers for the command-line entry point to follow DRY principles
"""
import json
from pathlib import Path
from typing import Dict, List, Optional, Union

# Constants
DEFAULT_OUTPUT_NAME = "output"
SCALE_SEPARATOR = ","
SCALE_ASSIGN = "="

Scalar = Union[int, float, bool, str, list]


def parse_solver_list(text: Optional[str]) -> Optional[List[str]]:
    """
    Split a comma-separated solver list.

    Args:
        text: e.g. "alg1,alg2" (None or empty keeps the preset)

    Returns:
        list or None: Stripped, non-empty solver ids
    """
    if not text:
        return None
    solvers = [item.strip() for item in text.split(SCALE_SEPARATOR) if item.strip()]
    if not solvers:
        raise ValueError(f"No solvers in list: {text!r}")
    return solvers


def coerce_value(text: str) -> Scalar:
    """Interpret a scale value as JSON when possible (numbers, booleans, lists), else keep the string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_scale(text: Optional[str]) -> Dict[str, Scalar]:
    """
    Parse `name=value,...` overrides.

    Args:
        text: Override string; list values use JSON brackets, and commas
            inside brackets do not separate overrides

    Returns:
        dict: Parsed overrides
    """
    if not text:
        return {}
    overrides = {}
    depth = 0
    token = ""
    tokens = []
    for char in text:
        depth += char == "["
        depth -= char == "]"
        if char == SCALE_SEPARATOR and depth == 0:
            tokens.append(token)
            token = ""
        else:
            token += char
    tokens.append(token)

    for item in tokens:
        item = item.strip()
        if not item:
            continue
        if SCALE_ASSIGN not in item:
            raise ValueError(f"Scale override must look like name=value, got {item!r}")
        name, value = item.split(SCALE_ASSIGN, 1)
        overrides[name.strip()] = coerce_value(value.strip())
    return overrides


def load_config_file(path: Optional[Union[str, Path]]) -> dict:
    """
    Read a JSON run configuration.

    Args:
        path: Config file (None gives an empty config)

    Returns:
        dict: Parsed settings
    """
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ValueError(f"Config file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ValueError(f"Config file {path} must hold a JSON object")
    return document


def merge_settings(file_settings: dict, flag_settings: dict) -> dict:
    """
    Overlay CLI flags on config-file settings; 'scale' dicts merge key by key.

    Args:
        file_settings: Settings from --config
        flag_settings: Settings from flags (None values are ignored)

    Returns:
        dict: Merged settings
    """
    merged = dict(file_settings)
    for key, value in flag_settings.items():
        if value is None:
            continue
        if key == "scale":
            merged["scale"] = {**merged.get("scale", {}), **value}
        else:
            merged[key] = value
    return merged


def get_output_directory(base_dir: Path, out_text: Optional[str], default_output: Path) -> Path:
    """
    Resolve the output directory.

    Args:
        base_dir: Directory relative paths are resolved against
        out_text: Value of --out
        default_output: Used when --out is absent

    Returns:
        Path: Absolute output directory
    """
    out_text = (out_text or "").strip()
    out_dir = Path(out_text) if out_text else default_output
    if not out_dir.is_absolute():
        out_dir = (base_dir / out_dir).resolve()
    return out_dir
