"""Result serialization: fixed-precision CSV tables, JSON summaries, run
manifests, and the flat key=value config format.

Floats are written with 17 significant digits (full IEEE double
round-trip), so identical results serialize to identical bytes. Files are
written to a temporary sibling and renamed into place; a failed run never
leaves a partial output behind.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .experiments import (
    CellResult,
    GlobalConfig,
    LocalConfig,
    MultiscaleConfig,
    MultiscaleResult,
)
from .stats import FitResult

FLOAT_DIGITS = 17

CELL_COLUMNS = (
    "dataset", "m", "m_halt", "trials", "nu_mean", "nu_stderr", "r_total",
    "eps_mean", "eps_stderr", "rmse_theta", "rmse_stderr", "exhausted",
)

MULTISCALE_COLUMNS = (
    "dataset", "stage_max", "depth_final", "m_halt", "trials", "r_total_mean",
    "r_total_stderr", "rmse_final", "rmse_stderr", "exhausted",
)

CONFIG_TYPES = {"local": LocalConfig, "global": GlobalConfig, "multiscale": MultiscaleConfig}
DATASET_OF_TYPE = {cls: kind for kind, cls in CONFIG_TYPES.items()}


def fmt(value) -> str:
    """Fixed-precision text form of one CSV field."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{FLOAT_DIGITS}g")
    return str(value)


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_cells_csv(path, cells: list[CellResult]) -> None:
    rows = [
        (c.dataset, c.m, c.m_halt, c.trials, c.nu, c.nu_stderr, c.r_total,
         c.mean_eps, c.eps_stderr, c.rmse_theta, c.rmse_stderr, c.exhausted)
        for c in cells
    ]
    _atomic_write_text(Path(path), _csv_text(CELL_COLUMNS, rows))


def write_multiscale_csv(path, m_halt: int, results: list[MultiscaleResult]) -> None:
    rows = [
        ("multiscale", r.stage_max, 2 ** r.stage_max, m_halt, r.trials,
         r.r_total_mean, r.r_total_stderr, r.rmse_final, r.rmse_stderr, r.exhausted)
        for r in results
    ]
    _atomic_write_text(Path(path), _csv_text(MULTISCALE_COLUMNS, rows))


def read_table(path) -> dict[str, list[str]]:
    """Columns of an emitted CSV, as text."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        columns: dict[str, list[str]] = {name: [] for name in reader.fieldnames}
        for record in reader:
            for name in reader.fieldnames:
                columns[name].append(record[name])
    return columns


def _jsonable(obj):
    if isinstance(obj, FitResult):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> None:
    _atomic_write_text(Path(path), json.dumps(_jsonable(payload), indent=2) + "\n")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


# --------------------------------------------------------------------------
# config round-trip
# --------------------------------------------------------------------------

def _field_to_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_text(config) -> str:
    """Serialize a config to the flat key = value format (lossless)."""
    kind = DATASET_OF_TYPE.get(type(config))
    if kind is None:
        raise TypeError(f"not a dataset config: {config!r}")
    lines = [f"dataset = {kind}"]
    for f in dataclasses.fields(config):
        lines.append(f"{f.name} = {_field_to_text(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def _parse_field(f: dataclasses.Field, text: str):
    text = text.strip()
    typ = f.type
    if typ == "bool":
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"{f.name}: expected a boolean, got {text!r}")
    if typ == "int":
        return int(text)
    if typ == "float":
        value = float(text)
        if math.isnan(value):
            raise ValueError(f"{f.name}: nan is not a valid value")
        return value
    if typ.startswith("tuple"):
        return tuple(int(part) for part in text.split(",") if part.strip())
    raise TypeError(f"unsupported config field type {typ!r} for {f.name}")


def config_from_items(kind: str, items: dict[str, str]):
    cls = CONFIG_TYPES.get(kind)
    if cls is None:
        raise ValueError(f"unknown dataset {kind!r}; expected one of {sorted(CONFIG_TYPES)}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(items) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys for dataset {kind!r}: {sorted(unknown)}")
    kwargs = {name: _parse_field(known[name], text) for name, text in items.items()}
    return cls(**kwargs)


def config_from_text(text: str):
    """Parse the flat key = value format back into a config object."""
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in items:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value.strip()
    kind = items.pop("dataset", None)
    if kind is None:
        raise ValueError("config is missing the 'dataset' key")
    return config_from_items(kind, items)


def config_from_dict(kind: str, data: dict):
    """Rebuild a config from a JSON summary/manifest 'config' mapping."""
    return config_from_items(
        kind, {k: _field_to_text(tuple(v) if isinstance(v, list) else v) for k, v in data.items()}
    )


def load_config_file(path):
    """Load a config from a key=value file, a JSON config, or a manifest."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        data = json.loads(text)
        if "config" in data and "dataset" in data:  # run manifest or summary
            return config_from_dict(data["dataset"], data["config"])
        kind = data.pop("dataset", None)
        if kind is None:
            raise ValueError(f"{path}: JSON config is missing the 'dataset' key")
        return config_from_dict(kind, data)
    return config_from_text(text)


# --------------------------------------------------------------------------
# run manifest
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    """Provenance record of one CLI run; 'outputs' maps file names to
    sha256 digests. Rebuilding the config from 'config' and rerunning with
    the same master seed reproduces those digests."""

    tool: str
    version: str
    dataset: str
    config: dict
    master_seed: int
    threads: int
    started: str
    finished: str
    outputs: dict[str, str]


def write_manifest(path, manifest: RunManifest) -> None:
    write_json(path, dataclasses.asdict(manifest))
