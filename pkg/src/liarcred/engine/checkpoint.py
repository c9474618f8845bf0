"""Checkpoints: ``manifest.json`` describing tensors plus ``params.bin``.

``params.bin`` is the concatenation of every tensor's values as
little-endian float64 in row-major order, in manifest order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def save_checkpoint(directory, tensors: dict, metadata: dict | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    with (directory / "params.bin").open("wb") as fh:
        for name, array in tensors.items():
            array = np.ascontiguousarray(array, dtype="<f8")
            fh.write(array.tobytes(order="C"))
            entries.append({"name": name, "shape": list(array.shape), "offset": offset, "count": int(array.size)})
            offset += array.size
    manifest = {"format": FORMAT_VERSION, "dtype": "<f8", "tensors": entries, "metadata": metadata or {}}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return directory


def load_checkpoint(directory) -> tuple[dict, dict]:
    """Return ``(tensors, metadata)``."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format {manifest.get('format')!r}")
    raw = np.fromfile(directory / "params.bin", dtype="<f8")
    tensors = {}
    for e in manifest["tensors"]:
        chunk = raw[e["offset"] : e["offset"] + e["count"]]
        if chunk.size != e["count"]:
            raise ValueError(f"checkpoint truncated at tensor {e['name']}")
        tensors[e["name"]] = chunk.astype(np.float64).reshape(e["shape"])
    return tensors, manifest["metadata"]
