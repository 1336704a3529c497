"""Deterministic file writers: CSV with fixed columns, JSON mirrors,
binary dumps with sidecars, and the run manifest.

Floats are written with Python's shortest round-trip repr and a '.'
decimal, so identical computations reproduce byte-identical files.  The
manifest records wall-clock times and is the one artifact excluded from
the byte-identity guarantee.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list, rows: list) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
                    + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def write_array(path: Path, array: np.ndarray, sidecar: dict) -> tuple:
    """Binary array dump plus a JSON sidecar describing it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, np.asarray(array))
    npy = path if path.suffix == ".npy" else path.with_suffix(path.suffix + ".npy")
    meta = dict(sidecar)
    meta["shape"] = list(np.asarray(array).shape)
    side = write_json(npy.with_suffix(".json"), meta)
    return npy, side


def write_operator_coo(path: Path, matrix: sp.spmatrix) -> Path:
    """Coordinate triplet text export: one `row col value` line per entry."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{coo.row[i]} {coo.col[i]} {fmt(coo.data[i])}" for i in order]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_spectrum_csv(path: Path, eigenvalues: np.ndarray) -> Path:
    rows = [(k, lam) for k, lam in enumerate(eigenvalues)]
    return write_csv(path, ["k", "lambda"], rows)


@dataclass
class ManifestEntry:
    command: str
    status: str  # pass | fail | report-only
    files: list = field(default_factory=list)
    wall_s: float = 0.0


@dataclass
class RunManifest:
    config_digest: str
    seed: int
    entries: list = field(default_factory=list)

    def add(self, entry: ManifestEntry) -> None:
        if entry.status not in ("pass", "fail", "report-only"):
            raise ValueError(f"bad status {entry.status!r}")
        self.entries.append(entry)

    def write(self, path: Path) -> Path:
        payload = {
            "config_digest": self.config_digest,
            "seed": self.seed,
            "commands": [{"command": e.command, "status": e.status,
                          "files": sorted(str(f) for f in e.files),
                          "wall_s": e.wall_s} for e in self.entries],
        }
        return write_json(path, payload)

    @property
    def ok(self) -> bool:
        return all(e.status != "fail" for e in self.entries)
