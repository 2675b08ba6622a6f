"""Versioned JSON records, CSV tables and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .fields import Grid2D, SpaceTimeField
from .solver import SolutionRecord

SCHEMA_VERSION = "1.0"


class SchemaError(ValueError):
    pass


def _check_version(doc: dict, path) -> None:
    ver = str(doc.get("schema_version", ""))
    major = ver.split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise SchemaError(f"{path}: unsupported schema_version {ver!r}")


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False,
                      default=_default) + "\n"


def _default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(path: Path, doc: dict) -> Path:
    return write_text(path, dumps({"schema_version": SCHEMA_VERSION, **doc}))


def read_json(path: Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    _check_version(doc, path)
    return doc


def solution_to_doc(rec: SolutionRecord) -> dict:
    return {
        "grid": rec.grid.to_dict(),
        "flux": rec.flux_tag,
        "scheme": rec.scheme,
        "cfl": rec.cfl,
        "boundary": rec.boundary,
        "values": [float(x) for x in rec.values.ravel()],
        "supnorm": rec.supnorm,
        "meta": rec.meta,
    }


def write_solution(path: Path, rec: SolutionRecord) -> Path:
    return write_json(path, solution_to_doc(rec))


def read_solution(path: Path) -> SolutionRecord:
    doc = read_json(path)
    try:
        grid = Grid2D(**{k: doc["grid"][k] for k in ("t0", "t1", "x0", "x1", "nt", "nx")})
        vals = np.asarray(doc["values"], dtype=float).reshape(grid.nt, grid.nx)
        return SolutionRecord(SpaceTimeField(grid, vals), doc["flux"], doc["scheme"],
                              float(doc["cfl"]), doc.get("boundary", "outflow"),
                              dict(doc.get("meta", {})))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed solution record ({exc})") from None


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def write_csv(path: Path, rows: list[dict], columns: list[str]) -> Path:
    return write_text(path, csv_text(rows, columns))


def read_csv(path: Path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, config: dict, files: list[Path]) -> Path:
    out_dir = Path(out_dir)
    doc = {
        "toolkit_version": __version__,
        "config": config,
        "checksums": {Path(f).name: sha256(f) for f in sorted(files, key=lambda p: Path(p).name)},
    }
    return write_json(out_dir / "manifest.json", doc)
