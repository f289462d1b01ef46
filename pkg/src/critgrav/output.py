"""Deterministic CSV/JSON writers (shortest round-trip float formatting)."""

from __future__ import annotations

import enum
import json
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, path: Optional[str]):
    """Write to ``path`` or stdout when ``path`` is None."""
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text)


def emit_in_dir(directory: str, name: str, text: str) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    p = d / name
    p.write_text(text)
    return p
