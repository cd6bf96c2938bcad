"""Atomic writers for VTK fields, CSV curves and the JSON run manifest."""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..errors import ConfigError, PorofracError


class OutputError(PorofracError, OSError):
    """A result file could not be written."""


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(values) -> str:
    return " ".join(f"{v:.17g}" for v in np.ravel(values))


def vtk_text(mesh, point_data=None, cell_data=None, title="porofrac") -> str:
    """Legacy ASCII unstructured grid of quadrilaterals (VTK cell type 9).

    2-column point arrays are written as vectors padded with a zero third
    component, 1-D arrays as scalars.
    """
    nodes = np.asarray(mesh.nodes)
    cells = np.asarray(mesh.elements)
    if len(nodes) == 0 or len(cells) == 0:
        raise ConfigError("cannot export an empty mesh")
    out = io.StringIO()
    out.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
    out.write(f"POINTS {len(nodes)} double\n")
    for x, y in nodes:
        out.write(f"{x:.17g} {y:.17g} 0\n")
    out.write(f"CELLS {len(cells)} {5 * len(cells)}\n")
    for c in cells:
        out.write(f"4 {c[0]} {c[1]} {c[2]} {c[3]}\n")
    out.write(f"CELL_TYPES {len(cells)}\n" + "9\n" * len(cells))
    for kind, data, n in (("POINT_DATA", point_data, len(nodes)),
                          ("CELL_DATA", cell_data, len(cells))):
        if not data:
            continue
        out.write(f"{kind} {n}\n")
        for name, values in data.items():
            values = np.asarray(values, dtype=float)
            if values.shape[0] != n:
                raise ConfigError(f"field {name!r} has {values.shape[0]} entries, expected {n}")
            if values.ndim == 1:
                out.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                out.write("\n".join(f"{v:.17g}" for v in values) + "\n")
            elif values.ndim == 2 and values.shape[1] in (2, 3):
                vec = np.zeros((n, 3))
                vec[:, :values.shape[1]] = values
                out.write(f"VECTORS {name} double\n")
                out.write("\n".join(_fmt(v) for v in vec) + "\n")
            else:
                raise ConfigError(f"field {name!r} must be scalar or 2/3-vector per entry")
    return out.getvalue()


def export_vtk(mesh, path, point_data=None, cell_data=None) -> Path:
    return atomic_write(path, vtk_text(mesh, point_data, cell_data))


def csv_text(columns: dict, units: dict | None = None) -> str:
    """CSV with a ``name [unit]`` header row and 17-digit floats."""
    if not columns:
        raise ConfigError("no columns to write")
    arrays = [np.asarray(v, dtype=float).ravel() for v in columns.values()]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ConfigError("CSV columns differ in length")
    units = units or {}
    header = ",".join(f"{k} [{units[k]}]" if k in units else k for k in columns)
    rows = (",".join(f"{v:.17g}" for v in row) for row in zip(*arrays))
    return header + "\n" + "".join(r + "\n" for r in rows)


def export_csv(columns: dict, path, units: dict | None = None) -> Path:
    return atomic_write(path, csv_text(columns, units))


def read_csv(path) -> dict:
    """Inverse of :func:`export_csv`; unit suffixes are dropped from the names."""
    with open(path) as fh:
        names = [n.split(" [", 1)[0] for n in fh.readline().rstrip("\n").split(",")]
        data = np.loadtxt(fh, delimiter=",", ndmin=2).reshape(-1, len(names))
    return {name: data[:, i] for i, name in enumerate(names)}


def write_manifest(path, manifest: dict) -> Path:
    return atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
