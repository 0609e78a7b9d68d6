"""Result documents (JSON) and CSV tables.

Complex numbers are stored as ``[re, im]``.  Floats are written with
Python's shortest round-trip representation, so parsing a document gives
back bit-identical numbers.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__


def encode(value: Any) -> Any:
    """Convert numpy/complex values into JSON-compatible structures."""
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return [encode(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def result_document(command: str, config_hash: str | None, **sections) -> dict:
    doc = {"version": __version__, "command": command, "config_hash": config_hash}
    for key in ("status", "scalars", "tables", "diagnostics"):
        doc[key] = encode(sections.pop(key, {} if key != "status" else "ok"))
    doc.update(encode(sections))
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def write_document(doc: dict, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.json"
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
