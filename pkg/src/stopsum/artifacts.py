"""Deterministic CSV/JSON artifact serialization.

Every table artifact is byte-reproducible for a given (config, seed):
comma-separated cells, '.' decimal point, 17 significant digits, mandatory
header row, optional single-line JSON metadata block prefixed with '# '.
JSON artifacts use UTF-8 and sorted keys.  Wall-clock timestamps never
enter these files; they live only in the run sidecar.
"""

from __future__ import annotations

import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from stopsum.errors import ValidationError

__all__ = [
    "OutputLock",
    "format_number",
    "read_csv",
    "write_csv",
    "write_json",
    "write_pmf_csv",
    "write_sidecar",
]

LOCK_NAME = ".stopsum-lock"
SIDECAR_NAME = "run-meta.json"


def _plain(value):
    """Recursively coerce numpy scalars/arrays for JSON emission."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def format_number(value) -> str:
    """One CSV cell: integers verbatim, reals at 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(value)


def write_csv(path, rows, columns=None, meta=None) -> None:
    """Write dict rows as CSV with an optional '# {json}' metadata line."""
    rows = list(rows)
    if columns is None:
        if not rows:
            raise ValidationError("cannot infer columns from an empty table")
        columns = list(rows[0].keys())
    lines = []
    if meta is not None:
        lines.append(
            "# " + json.dumps(_plain(meta), sort_keys=True, separators=(",", ":"))
        )
    lines.append(",".join(columns))
    for row in rows:
        missing = [c for c in columns if c not in row]
        if missing:
            raise ValidationError(f"row lacks columns {missing}")
        lines.append(",".join(format_number(row[c]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path):
    """Inverse of write_csv: (meta-or-None, list of dict rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    meta = None
    if lines and lines[0].startswith("#"):
        meta = json.loads(lines[0].lstrip("#").strip())
        lines = lines[1:]
    if not lines:
        raise ValidationError(f"{path} has no header row")
    columns = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(columns):
            raise ValidationError(f"malformed row in {path}: {ln!r}")
        rows.append(dict(zip(columns, (_parse_cell(c) for c in cells))))
    return meta, rows


def write_json(path, payload) -> None:
    """UTF-8 JSON with sorted keys and a trailing newline."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_plain(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def pmf_meta(pmf, policy=None) -> dict:
    """Header block describing a lattice law (and how it was truncated)."""
    meta = {
        "label": pmf.label,
        "offset": int(pmf.offset),
        "tail_left": float(pmf.tail_left),
        "tail_right": float(pmf.tail_right),
        "tail_mass": float(pmf.tail_mass),
        "mass": float(pmf.mass()),
    }
    if pmf.spec is not None:
        s = pmf.spec
        meta["spec"] = {
            "alpha": s.alpha,
            "side": s.side,
            "a": s.a,
            "b": s.b,
            "sv_family": list(s.sv_family),
            "normalization": s.normalization,
        }
    if policy is not None:
        meta["policy"] = {
            "t_max": policy.t_max,
            "mode": policy.mode,
            "target_tail": policy.target_tail,
        }
    return meta


def write_pmf_csv(path, pmf, policy=None) -> None:
    """Serialize a lattice law as (t, prob) rows under its metadata block."""
    rows = [
        {"t": int(t), "prob": float(p)}
        for t, p in zip(pmf.support_values(), pmf.probs)
    ]
    write_csv(path, rows, columns=["t", "prob"], meta=pmf_meta(pmf, policy))


class OutputLock:
    """One run at a time per output directory, enforced by a lock file."""

    def __init__(self, out_dir):
        self.out_dir = str(out_dir)
        self.path = os.path.join(self.out_dir, LOCK_NAME)
        self._fd = None

    def __enter__(self):
        os.makedirs(self.out_dir, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ValidationError(
                f"output directory {self.out_dir!r} is locked by another run "
                f"(remove {LOCK_NAME} if that run is dead)"
            ) from None
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._fd is not None:
            os.close(self._fd)
            os.unlink(self.path)
        return False


def write_sidecar(out_dir, command: str, started: float, finished: float, extra=None):
    """Run metadata sidecar; the only artifact that may carry timestamps."""

    def iso(stamp: float) -> str:
        return datetime.fromtimestamp(stamp, tz=timezone.utc).isoformat()

    payload = {
        "command": command,
        "started_utc": iso(started),
        "finished_utc": iso(finished),
        "elapsed_seconds": finished - started,
    }
    if extra:
        payload.update(_plain(extra))
    write_json(os.path.join(str(out_dir), SIDECAR_NAME), payload)
