"""Experiment configuration: one TOML file, validated, with a stable digest.

Flags on the command line only select the command and the config path;
every numeric choice lives in the file so the digest pins the run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

_DEFAULTS = {
    "run": {"seed": 1234, "output_dir": "outputs"},
    "generators": [{"preset": "euclidean1", "n": 64},
                   {"preset": "euclidean2", "n": 16},
                   {"preset": "grushin", "n": 16},
                   {"preset": "heisenberg", "n": 8}],
    "time": {"period": 1.0, "samples": 16},
    "zgrid": {"z_min": 1e-3, "extent": 2.0, "ratio": 1.25},
    "quadrature": {"base_order": 16, "series_terms": 6, "tail_terms": 10},
    "fractional": {"s_values": [0.25, 0.5, 0.75]},
    "tolerances": {"oracle_match": 1e-6, "identity": 1e-8, "sign_audit": 1e-12,
                   "nonneg": 1e-10, "neumann": 1e-3},
    "trace": {"fit_max": 0.1, "field_damping": 4.0},
    "scan": {"radii": [0.5, 1.0, 2.0], "t0": -26.0, "period": 16.0, "samples": 1024,
             "elliptic_radii": [0.4, 0.8, 1.6], "seeds": [11, 12]},
    "audit": {"radii": [0.15, 0.25], "a_values": [-0.5, 0.0, 0.5],
              "z_nodes": 17, "z_spacing": 0.0625},
    "frac_apply": {"operator": "laplacian", "route": "spectral", "s": 0.5,
                   "input": "", "seed": 7},
}


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict
    digest: str
    path: str = ""

    def __getitem__(self, key):
        return self.data[key]

    def section(self, name: str) -> dict:
        return self.data[name]

    @property
    def seed(self) -> int:
        return int(self.data["run"]["seed"])

    @property
    def output_dir(self) -> Path:
        import os
        root = os.environ.get("FRACHEAT_OUTPUT", self.data["run"]["output_dir"])
        return Path(root)

    @property
    def s_values(self) -> list:
        return [float(s) for s in self.data["fractional"]["s_values"]]


def _validate(data: dict) -> None:
    if not 0 < len(data["generators"]):
        raise ValueError("config needs at least one generator")
    for gen in data["generators"]:
        if "preset" not in gen:
            raise ValueError("each generator entry needs a preset name")
    for s in data["fractional"]["s_values"]:
        if not 0.0 < float(s) < 1.0:
            raise ValueError(f"fractional order {s} outside (0, 1)")
    n = int(data["time"]["samples"])
    if n < 2 or n & (n - 1):
        raise ValueError("time samples must be a power of two")
    zg = data["zgrid"]
    if not 0 < float(zg["z_min"]) < float(zg["extent"]):
        raise ValueError("zgrid needs 0 < z_min < extent")
    if not 1.0 < float(zg["ratio"]) <= 2.0:
        raise ValueError("zgrid ratio must lie in (1, 2]")
    for key, value in data["tolerances"].items():
        if float(value) <= 0:
            raise ValueError(f"tolerance {key} must be positive")


def config_digest(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path=None) -> ExperimentConfig:
    """Load a TOML config (defaults apply for missing keys), validate,
    and record its digest."""
    data = dict(_DEFAULTS)
    text_path = ""
    if path is not None:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        data = _merge(_DEFAULTS, user)
        text_path = str(path)
    _validate(data)
    return ExperimentConfig(data=data, digest=config_digest(data), path=text_path)
