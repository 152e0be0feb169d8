"""File formats: JSON inputs with diagnostics, deterministic CSV, run manifests."""
from __future__ import annotations

import dataclasses
import json
import math
import os
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import BadInputFile, ValidationError
from .prob import JointSource, SolverConfig, validate_joint_source

#: Significant digits for every CSV float.
DIGITS = 12
SEED_ENV = "TWRN_RD_SEED"


def format_value(v) -> str:
    """Canonical CSV text of one cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v == 0.0:
            return "0"
        return format(v, f".{DIGITS}g")
    return str(v)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValidationError(f"row has {len(row)} cells, header has {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Write a CSV with LF endings; returns the text written."""
    text = csv_text(columns, rows)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    lines = [ln for ln in lines if ln]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def to_jsonable(obj):
    """Recursively convert numpy containers and dataclasses to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_json_dict"):
            return to_jsonable(obj.to_json_dict())
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> str:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def read_json(path) -> Any:
    """Parse a JSON file; syntax errors report line and column."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise BadInputFile(f"{p}: cannot read ({e.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise BadInputFile(f"{p}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def load_source(path) -> JointSource:
    raw = read_json(path)
    if not isinstance(raw, Mapping):
        raise BadInputFile(f"{path}: top level must be an object")
    try:
        return validate_joint_source(raw)
    except ValidationError as e:
        raise BadInputFile(f"{path}: {e}") from None


def save_source(path, source: JointSource) -> str:
    return write_json(path, source.to_json_dict())


def load_channel(path):
    from .jscc import BroadcastChannelSpec

    raw = read_json(path)
    if not isinstance(raw, Mapping):
        raise BadInputFile(f"{path}: top level must be an object")
    try:
        return BroadcastChannelSpec.from_json_dict(raw)
    except ValidationError as e:
        raise BadInputFile(f"{path}: {e}") from None


CONFIG_FIELDS = tuple(f.name for f in dataclasses.fields(SolverConfig))


def load_config(path=None, overrides: Mapping[str, Any] | None = None, env=None) -> SolverConfig:
    """Config file, then explicit overrides, then the seed environment variable."""
    values: dict[str, Any] = {}
    if path is not None:
        raw = read_json(path)
        if not isinstance(raw, Mapping):
            raise BadInputFile(f"{path}: top level must be an object")
        for key, val in raw.items():
            if key not in CONFIG_FIELDS:
                raise BadInputFile(f"{path}: unknown field {key!r}")
            values[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            values["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ValidationError(f"{SEED_ENV} must be an integer") from None
    try:
        return SolverConfig(**values)
    except (TypeError, ValueError) as e:
        raise BadInputFile(f"invalid config: {e}") from None


@dataclass
class RunManifest:
    """Provenance written next to every CLI output."""

    command: str
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    output: str = ""
    version: str = __version__
    wall_time: float = 0.0
    python: str = field(default_factory=platform.python_version)
    converged: bool = True

    def write(self, path) -> str:
        return write_json(path, dataclasses.asdict(self))


def manifest_path(out) -> Path:
    out = Path(out)
    if out.suffix:
        return out.with_name(out.name + ".manifest.json")
    return out / "manifest.json"
