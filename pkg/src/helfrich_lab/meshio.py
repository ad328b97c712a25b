"""Minimal OBJ (ASCII) and PLY (binary little-endian) readers/writers.

Both formats round-trip vertex coordinates exactly: OBJ prints shortest
round-trip decimals via %.17g, PLY stores float64.  Only triangle meshes
are accepted.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .mesh import MeshError, TriMesh


class FileFormatError(MeshError):
    """Unreadable or unsupported mesh file."""


def write_obj(mesh: TriMesh, path) -> None:
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.faces:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path, *, validate: bool = True) -> TriMesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileNotFoundError(str(exc)) from exc
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise FileFormatError(f"{path}:{ln}: malformed vertex line")
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            ids = [p.split("/")[0] for p in parts[1:]]
            if len(ids) != 3:
                raise FileFormatError(f"{path}:{ln}: only triangle faces supported")
            idx = [int(i) for i in ids]
            # OBJ is 1-based; negative indices count from the end.
            idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
            faces.append(idx)
        # Normals, texture coords, groups etc. are ignored.
    if not verts or not faces:
        raise FileFormatError(f"{path}: no triangle mesh found")
    return TriMesh(np.array(verts), np.array(faces), validate=validate)


_PLY_SCALARS = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def write_ply(mesh: TriMesh, path) -> None:
    n, m = mesh.n_vertices, mesh.n_faces
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {n}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        f"element face {m}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(mesh.vertices.astype("<f8").tobytes())
        counts = np.full((m, 1), 3, dtype=np.uint8)
        body = bytearray()
        idx = mesh.faces.astype("<i4")
        for row, cnt in zip(idx, counts):
            body += cnt.tobytes() + row.tobytes()
        fh.write(bytes(body))


def read_ply(path, *, validate: bool = True) -> TriMesh:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FileNotFoundError(str(exc)) from exc
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply") or end < 0:
        raise FileFormatError(f"{path}: not a PLY file")
    header = blob[:end].decode("ascii", "replace").splitlines()
    offset = end + len(b"end_header\n")

    fmt = None
    elements: list[tuple[str, int, list]] = []
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise FileFormatError(f"{path}: property before element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append(("scalar", parts[1], parts[2]))
    if fmt != "binary_little_endian":
        raise FileFormatError(f"{path}: only binary_little_endian PLY supported, got {fmt!r}")

    verts = None
    faces = None
    for name, count, props in elements:
        if name == "vertex":
            names = [p[2] for p in props if p[0] == "scalar"]
            if any(p[0] != "scalar" for p in props):
                raise FileFormatError(f"{path}: list property on vertices unsupported")
            fmt_str = "<" + "".join(_PLY_SCALARS[p[1]] for p in props)
            size = struct.calcsize(fmt_str)
            rows = [struct.unpack_from(fmt_str, blob, offset + i * size) for i in range(count)]
            offset += count * size
            cols = {nm: [r[k] for r in rows] for k, nm in enumerate(names)}
            try:
                verts = np.array([cols["x"], cols["y"], cols["z"]], dtype=np.float64).T
            except KeyError as exc:
                raise FileFormatError(f"{path}: vertex element lacks x/y/z") from exc
        elif name == "face":
            if len(props) != 1 or props[0][0] != "list":
                raise FileFormatError(f"{path}: face element must be a single index list")
            _, cnt_t, idx_t, _ = props[0]
            cnt_fmt, idx_fmt = "<" + _PLY_SCALARS[cnt_t], "<" + _PLY_SCALARS[idx_t]
            cnt_size, idx_size = struct.calcsize(cnt_fmt), struct.calcsize(idx_fmt)
            out = []
            for _ in range(count):
                (k,) = struct.unpack_from(cnt_fmt, blob, offset)
                offset += cnt_size
                if k != 3:
                    raise FileFormatError(f"{path}: only triangle faces supported, got {k}-gon")
                out.append(struct.unpack_from("<" + "".join([_PLY_SCALARS[idx_t]] * 3), blob, offset))
                offset += 3 * idx_size
            faces = np.array(out, dtype=np.int64)
        else:
            raise FileFormatError(f"{path}: unsupported element {name!r}")
    if verts is None or faces is None:
        raise FileFormatError(f"{path}: vertex or face element missing")
    return TriMesh(verts, faces, validate=validate)


def read_mesh(path, *, validate: bool = True) -> TriMesh:
    """Dispatch on file extension (.obj or .ply)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return read_obj(path, validate=validate)
    if suffix == ".ply":
        return read_ply(path, validate=validate)
    raise FileFormatError(f"unsupported mesh format {suffix!r} (use .obj or .ply)")


def write_mesh(mesh: TriMesh, path) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        write_obj(mesh, path)
    elif suffix == ".ply":
        write_ply(mesh, path)
    else:
        raise FileFormatError(f"unsupported mesh format {suffix!r} (use .obj or .ply)")
