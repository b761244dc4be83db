"""Deterministic CSV + manifest output.

Every scenario writes a manifest.json (all resolved parameters, tolerances,
truncation-check outcomes) and CSV files whose '#'-prefixed header block
carries the manifest hash, so every emitted number traces to a recorded
parameter set.  Floats are serialized with repr (shortest round-trip), which
makes identical configs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(complex(v))
    return str(v)


def canonical_manifest(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":"), default=str)


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(canonical_manifest(manifest).encode()).hexdigest()


def write_manifest(out_dir: str, manifest: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    digest = manifest_hash(manifest)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")
    return digest


def write_csv(path: str, columns: dict, meta: dict | None = None) -> None:
    """Write named columns (all equal length) with a '#' header block."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    length = len(arrays[0])
    for n, a in zip(names, arrays):
        if len(a) != length:
            raise ValueError(f"column {n!r} has length {len(a)}, expected {length}")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = ["# mechamp-csv schema=1"]
    for k in sorted(meta or {}):
        lines.append(f"# {k} = {_fmt((meta or {})[k])}")
    lines.append(",".join(names))
    cols = []
    for a in arrays:
        if np.iscomplexobj(a):
            raise ValueError("split complex columns into _re/_im before writing")
        cols.append([_fmt(v) for v in a.tolist()])
    for row in zip(*cols):
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str):
    """Read back a mechamp CSV: (meta dict, column dict of float arrays)."""
    meta: dict[str, str] = {}
    names: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, _, v = body.partition("=")
                    meta[k.strip()] = v.strip()
                continue
            if names is None:
                names = line.split(",")
                continue
            rows.append(line.split(","))
    if names is None:
        raise ValueError(f"{path}: no header row")
    cols = {}
    for i, n in enumerate(names):
        raw = [r[i] for r in rows]
        try:
            cols[n] = np.array([float(v) for v in raw])
        except ValueError:
            cols[n] = np.array(raw)
    return meta, cols


def complex_columns(prefix: str, values) -> dict:
    arr = np.asarray(values)
    return {f"{prefix}_re": arr.real, f"{prefix}_im": arr.imag}
