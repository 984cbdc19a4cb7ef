import dataclasses
import json
import os
from pathlib import Path

import numpy as np
from rich.console import Console

from .errors import InputError

console = Console()
err_console = Console(stderr=True)


def debug_enabled() -> bool:
    return os.getenv("DEBUG", "False").lower() == "true"


def to_jsonable(obj):
    """`json.dumps` fallback for numpy values and dataclasses."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=to_jsonable)


def debug_log(title: str, content):
    if not debug_enabled():
        return

    if isinstance(content, dict):
        content = dumps(content)
    elif not isinstance(content, str):
        content = str(content)

    err_console.print()
    err_console.print("=" * 70, markup=False)
    err_console.print(f"DEBUG: {title}", markup=False)
    err_console.print("-" * 70, markup=False)
    err_console.print(content, markup=False, highlight=False)
    err_console.print("=" * 70, markup=False)


def load_json_config(path: str | Path) -> dict:
    """
    Read a JSON config document mirroring the CLI flags.

    Keys may be spelled with hyphens (``mc-samples``) or underscores
    (``mc_samples``); they are normalised to underscores.

    Raises:
        InputError: if the document is not valid JSON or not an object
        OSError: if the file cannot be read
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON config ({e.msg} at line {e.lineno})") from e

    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")

    return {key.replace("-", "_"): value for key, value in data.items()}


def env_int(name: str) -> int | None:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise InputError(f"environment variable {name} must be an integer, got {raw!r}") from e
