"""Trajectory, report and manifest files."""

import hashlib
import json
from io import StringIO
from pathlib import Path

import numpy as np

from .dynamics import CHANNEL_NAMES, CHANNEL_UNITS, Trajectory

FORMAT = "fowtsim-trajectory 1"


def _header(meta):
    lines = [FORMAT]
    for k in sorted(meta):
        lines.append(f"{k}: {meta[k]}")
    return lines


def write_trajectory(traj, path, config_hash="", seed=None, channels=None):
    """Whitespace-delimited text with a ``#`` header naming hash, seed and units."""
    names = list(channels) if channels else list(CHANNEL_NAMES)
    if "t" not in names:
        names.insert(0, "t")
    meta = dict(traj.meta)
    meta.update(config_hash=config_hash, seed=seed, sample_dt=repr(float(traj.dt)))
    cols = np.column_stack([traj[n] for n in names])
    buf = StringIO()
    for line in _header(meta):
        buf.write(f"# {line}\n")
    buf.write("# " + " ".join(f"{n}[{CHANNEL_UNITS[n]}]".replace(" ", "") for n in names) + "\n")
    np.savetxt(buf, cols, fmt="%.12e")
    Path(path).write_text(buf.getvalue())


def read_trajectory(path):
    """Inverse of :func:`write_trajectory`; missing channels read as NaN."""
    meta, names = {}, None
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if body == FORMAT:
                continue
            if ": " in body:
                k, v = body.split(": ", 1)
                meta[k] = v
            else:
                names = [c.split("[")[0] for c in body.split()]
    if names is None:
        raise ValueError(f"{path}: no column header")
    cols = np.loadtxt(path, comments="#", ndmin=2)
    data = np.full((cols.shape[0], len(CHANNEL_NAMES)), np.nan)
    for j, n in enumerate(names):
        data[:, CHANNEL_NAMES.index(n)] = cols[:, j]
    for k in ("dt", "seed", "duration"):
        if meta.get(k) not in (None, "None"):
            meta[k] = float(meta[k]) if k != "seed" else int(meta[k])
    dt = float(meta.pop("sample_dt"))
    return Trajectory(data, dt, meta)


def write_text(path, text, config_hash="", seed=None, comment="#"):
    """Any text output with the standard hash/seed header."""
    head = f"{comment} config_hash: {config_hash}\n{comment} seed: {seed}\n"
    Path(path).write_text(head + text)


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, config_hash, seed, files, extra=None):
    """JSON manifest listing every output with its digest; no timestamps."""
    out_dir = Path(out_dir)
    doc = {"config_hash": config_hash, "seed": seed,
           "files": {str(Path(f).relative_to(out_dir)): file_digest(f) for f in sorted(map(str, files))}}
    if extra:
        doc.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
