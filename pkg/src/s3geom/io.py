"""Deterministic JSON/CSV writers and an ASCII OBJ writer and reader."""

from __future__ import annotations

import csv
import io as _io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import s3core

SCHEMA_VERSION = 1
log = logging.getLogger(__name__)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _json_value(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return _json_string(obj)
    if isinstance(obj, dict):
        items = (f"{_json_string(str(k))}: {_json_value(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0])))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _json_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps_json(obj: dict) -> str:
    """JSON with sorted keys, 17 significant digits and a ``schema`` field."""
    payload = {"schema": SCHEMA_VERSION, **obj}
    return _json_value(payload) + "\n"


def write_json(path, obj: dict) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else ""
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return v


def write_csv(path, header, rows) -> None:
    """CRLF rows; non-finite floats become empty fields."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (n, 3)
    faces: np.ndarray  # (m, 3), 0-based
    source_index: np.ndarray  # grid index (flattened) of each vertex
    dropped: int = 0


def grid_mesh(grid: np.ndarray, pole=s3core.NORTH_POLE, pole_drop: float = 1e-6) -> Mesh:
    """Triangulate a ``(n_u, n_v, 4)`` grid and project it stereographically.

    Vertices closer than ``pole_drop`` to the projection pole are removed
    together with every face touching them.
    """
    n_u, n_v, _ = grid.shape
    flat = grid.reshape(-1, 4)
    pole = s3core.normalize(np.asarray(pole, dtype=float))
    keep = np.linalg.norm(flat - pole, axis=-1) >= pole_drop
    dropped = int((~keep).sum())
    if dropped:
        log.info("dropped %d vertices within %g of the projection pole", dropped, pole_drop)
    new_index = np.full(flat.shape[0], -1, dtype=np.int64)
    new_index[keep] = np.arange(int(keep.sum()))
    verts = s3core.stereographic(flat[keep], pole)
    idx = np.arange(n_u * n_v).reshape(n_u, n_v)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    tri = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    tri = new_index[tri]
    tri = tri[np.all(tri >= 0, axis=1)]
    return Mesh(verts, tri, np.flatnonzero(keep), dropped)


def obj_text(mesh: Mesh) -> str:
    lines = [f"v {format_float(x)} {format_float(y)} {format_float(z)}" for x, y, z in mesh.vertices]
    lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in mesh.faces]
    return "\n".join(lines) + "\n"


def write_obj(path, mesh: Mesh) -> None:
    Path(path).write_text(obj_text(mesh), encoding="utf-8")


class ObjParseError(ValueError):
    pass


def parse_obj(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Read ``v`` and ``f`` records (1-based, ``i/j/k`` forms allowed); returns 0-based faces."""
    verts, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *fields = line.split()
        if tag == "v":
            if len(fields) < 3:
                raise ObjParseError(f"line {lineno}: vertex needs 3 coordinates")
            xyz = [float(f) for f in fields[:3]]
            if not all(math.isfinite(c) for c in xyz):
                raise ObjParseError(f"line {lineno}: non-finite vertex")
            verts.append(xyz)
        elif tag == "f":
            if len(fields) < 3:
                raise ObjParseError(f"line {lineno}: face needs 3 indices")
            idx = [int(f.split("/")[0]) for f in fields]
            idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
    V = np.array(verts, dtype=float).reshape(-1, 3)
    F = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if F.size and (F.min() < 0 or F.max() >= len(V)):
        raise ObjParseError("face index out of range")
    return V, F
