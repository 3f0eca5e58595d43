"""
Deterministic JSON and CSV output.

Floats are written with 17 significant digits so every double round-trips;
non-finite values become ``null`` in JSON and ``nan`` in CSV. Files are UTF-8
with LF line endings, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .errors import ProfileError
from .geometry import RadialMetric, profile_from_dict

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """``repr``-exact float text with 17 significant digits, or ``null``."""
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def to_jsonable(obj: Any) -> Any:
    """Convert numpy values, tuples and objects with ``to_dict()`` to plain Python."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps(obj: Any, indent: int = 2) -> str:
    """
    Serialize ``obj`` to deterministic JSON text.

    Args:
        obj: Plain data, numpy values or objects with ``to_dict()``
        indent: Spaces per nesting level

    Returns:
        JSON text ending with a newline
    """
    return _encode(to_jsonable(obj), indent, 0) + "\n"


def write_json(path: PathLike, obj: Any) -> Path:
    """Write ``obj`` as deterministic JSON and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
    return path


def read_json(path: PathLike) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        text = format_float(float(value))
        return "nan" if text == "null" else text
    if value is None:
        return ""
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table with LF line endings and 17-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def save_profile(path: PathLike, profile: RadialMetric) -> Path:
    """Write a profile as its versioned JSON document."""
    return write_json(path, profile.to_dict())


def load_profile(path: PathLike) -> RadialMetric:
    """
    Read a profile document.

    Raises:
        ProfileError: If the file is not a valid profile document
    """
    try:
        data = read_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise ProfileError(f"Cannot read profile from {path}: {e}") from e
    if not isinstance(data, dict):
        raise ProfileError(f"Profile document in {path} is not a JSON object")
    return profile_from_dict(data)


__all__ = [
    "dumps",
    "format_float",
    "load_profile",
    "read_json",
    "save_profile",
    "to_jsonable",
    "write_csv",
    "write_json",
]
