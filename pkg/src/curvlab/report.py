"""Run configuration, deterministic task seeds, and canonical report output.

Reports must be byte-identical across runs with the same configuration, so
JSON is emitted with sorted keys and a fixed layout, wall-clock timing never
enters the serialized payload, and every parallel-style task derives its
seed from the run seed plus a stable task index through a 64-bit mixer.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "MASK64",
    "splitmix64",
    "task_seed",
    "jsonable",
    "canonical_json",
    "write_json",
    "write_csv",
    "RunConfig",
    "VerificationReport",
]

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer; uniform scrambling of 64-bit input."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def task_seed(base_seed: int, index: int) -> int:
    """Seed for the task with the given stable index.

    Mixing (rather than plain addition) keeps streams for neighboring
    indices statistically unrelated while staying order-independent.
    """
    return splitmix64((int(base_seed) + int(index)) & MASK64)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def jsonable(obj):
    """Recursively convert report payloads to plain JSON-ready values."""
    if isinstance(obj, (str, bool, int, float)) or obj is None:
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def canonical_json(obj) -> str:
    """Sorted-key, indented JSON text with a trailing newline."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8")
    return path


def write_csv(path: str | Path, header: Sequence[str],
              rows: Iterable[Sequence]) -> Path:
    """CSV with CRLF row endings; floats keep their shortest round-trip form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def cell(v):
        v = jsonable(v)
        if isinstance(v, float):
            return repr(v)
        if isinstance(v, (dict, list)):
            return json.dumps(v, sort_keys=True)
        return v

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([cell(v) for v in row])
    return path


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_CONFIG_TYPES = {
    "seed": int,
    "r_max": float,
    "grid_points": int,
    "frame_budget": int,
    "output_dir": str,
    "format": str,
}


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by every subcommand, echoed verbatim into reports."""

    seed: int = 0
    r_max: float = 10.0
    grid_points: int = 121
    frame_budget: int = 100_000
    output_dir: str = "reports"
    format: str = "json"

    def validate(self) -> "RunConfig":
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.frame_budget < 1:
            raise ValueError("frame_budget must be at least 1")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Flat key = value lines; blank lines and # comments ignored."""
        values = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, val = (s.strip() for s in line.partition("="))
            if key not in _CONFIG_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _CONFIG_TYPES[key](val)
        return cls(**values).validate()

    @classmethod
    def resolve(cls, config_path: str | None = None,
                overrides: Mapping[str, object] | None = None,
                env: Mapping[str, str] | None = None) -> "RunConfig":
        """Defaults, then config file, then CURVLAB_SEED, then explicit flags."""
        cfg = cls.from_file(config_path) if config_path else cls()
        env = os.environ if env is None else env
        if "CURVLAB_SEED" in env:
            cfg = replace(cfg, seed=int(env["CURVLAB_SEED"]))
        clean = {k: v for k, v in (overrides or {}).items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config overrides: {sorted(unknown)}")
        return replace(cfg, **clean).validate()

    def to_json_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class VerificationReport:
    """A suite outcome plus the configuration that produced it.

    `timing_seconds` is carried for diagnostics but deliberately left out
    of the serialized payload so identical runs produce identical bytes.
    """

    suite: str
    passed: bool
    witnesses: dict
    config: RunConfig
    timing_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "witnesses": jsonable(self.witnesses),
            "config": self.config.to_json_dict(),
        }
