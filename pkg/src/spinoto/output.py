"""Plain-text tables with a metadata header, and the run manifest.

Numbers are written with 17 significant digits so files round-trip exactly
and are byte-identical across re-runs. Nothing time- or host-dependent is
written.
"""

import hashlib
import json
import os

import numpy as np


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_table(path, columns, rows, meta=None, descriptions=None):
    """Write a whitespace-separated table.

    Header lines are ``# key: value``; the last header line lists the column
    names. ``descriptions`` maps column names to a one-line meaning.
    """
    rows = list(rows)
    lines = []
    for key, val in (meta or {}).items():
        lines.append(f"# {key}: {val}")
    for name in columns:
        if descriptions and name in descriptions:
            lines.append(f"# column {name}: {descriptions[name]}")
    lines.append("# " + " ".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match columns")
        lines.append(" ".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_table(path):
    """(meta, columns, data) from a file written by :func:`write_table`."""
    meta, columns, data = {}, None, []
    with open(path) as fh:
        header = []
        for line in fh:
            if line.startswith("#"):
                header.append(line[1:].strip())
            elif line.strip():
                data.append([float(v) for v in line.split()])
    for h in header[:-1]:
        if ": " in h and not h.startswith("column "):
            k, v = h.split(": ", 1)
            meta[k] = v
    columns = header[-1].split()
    return meta, columns, np.array(data).reshape(len(data), len(columns))


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def write_manifest(out_dir, manifest, files):
    """manifest.json with the given fields plus a checksum per output file."""
    manifest = dict(manifest)
    manifest["outputs"] = {os.path.basename(f): sha256(f) for f in sorted(files)}
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj
