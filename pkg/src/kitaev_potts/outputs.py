"""CSV/JSON emission with a provenance header."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

OUT_ENV = "KITAEV_POTTS_OUT"


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def default_out_dir():
    return Path(os.environ.get(OUT_ENV, "kp_out"))


def _fmt(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return f"{float(v):.12g}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, dict):
        return {str(k): _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(w) for w in v.tolist()]
    if isinstance(v, (np.floating, float)):
        return None if not math.isfinite(float(v)) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def header_lines(config):
    # the timestamp line is the only one that changes between identical runs
    return [
        f"# artifact {__version__}",
        f"# config_hash {config_hash(config)}",
        f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
    ]


def write_csv(path, columns, rows, config):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in header_lines(config):
            fh.write(line + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rd = csv.reader(lines)
    cols = next(rd)
    return cols, [row for row in rd]


def write_json(path, payload, config):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "artifact_version": __version__,
        "config_hash": config_hash(config),
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(path, "w") as fh:
        json.dump({"meta": meta, **_jsonable(payload)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
