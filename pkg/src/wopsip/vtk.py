"""Legacy ASCII VTK output for triangular meshes, plus a small reader.

Only what is needed to look at solutions in ParaView and to round-trip our
own files: UNSTRUCTURED_GRID, triangles (cell type 5), scalar or 2-vector
cell/point data.
"""
from pathlib import Path

import numpy as np

VTK_TRIANGLE = 5


def _data_block(lines, name, values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(f"{v:.17g}" for v in values)
    elif values.ndim == 2 and values.shape[1] in (2, 3):
        if values.shape[1] == 2:
            values = np.column_stack([values, np.zeros(len(values))])
        lines.append(f"VECTORS {name} double")
        lines.extend(" ".join(f"{c:.17g}" for c in row) for row in values)
    else:
        raise ValueError(f"field {name!r}: expected shape (n,) or (n, 2|3), got {values.shape}")


def _check_name(name):
    if not name or any(c.isspace() for c in name):
        raise ValueError(f"invalid VTK field name {name!r}")


def vtk_text(mesh, cell_data=None, point_data=None, title="wopsip mesh"):
    """Render the file contents as a string."""
    cell_data = dict(cell_data or {})
    point_data = dict(point_data or {})
    nv, nt = len(mesh.vertices), len(mesh.triangles)
    for name, values in cell_data.items():
        _check_name(name)
        if len(values) != nt:
            raise ValueError(f"cell field {name!r} has {len(values)} values, mesh has {nt} cells")
    for name, values in point_data.items():
        _check_name(name)
        if len(values) != nv:
            raise ValueError(f"point field {name!r} has {len(values)} values, mesh has {nv} points")

    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {nv} double"]
    lines.extend(f"{x:.17g} {y:.17g} 0" for x, y in mesh.vertices)
    lines.append(f"CELLS {nt} {4 * nt}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles)
    lines.append(f"CELL_TYPES {nt}")
    lines.extend([str(VTK_TRIANGLE)] * nt)
    if cell_data:
        lines.append(f"CELL_DATA {nt}")
        for name, values in cell_data.items():
            _data_block(lines, name, values)
    if point_data:
        lines.append(f"POINT_DATA {nv}")
        for name, values in point_data.items():
            _data_block(lines, name, values)
    return "\n".join(lines) + "\n"


def export_vtk(mesh, path, cell_data=None, point_data=None, title="wopsip mesh"):
    """Write ``mesh`` and optional named fields to ``path``; returns the path."""
    path = Path(path)
    path.write_text(vtk_text(mesh, cell_data, point_data, title))
    return path


def read_vtk(path):
    """Parse a file written by :func:`export_vtk`.

    Returns a dict with ``points`` (n, 3), ``cells`` (m, 3), ``cell_types``,
    ``cell_data`` and ``point_data``.
    """
    tokens = Path(path).read_text().split("\n")
    if not tokens[0].startswith("# vtk DataFile"):
        raise ValueError("not a legacy VTK file")
    if tokens[2].strip() != "ASCII":
        raise ValueError("only ASCII files are supported")
    words = " ".join(tokens[3:]).split()
    pos = 0

    def take(k):
        nonlocal pos
        out = words[pos:pos + k]
        pos += k
        return out

    out = {"cell_data": {}, "point_data": {}}
    target = None
    count = 0
    while pos < len(words):
        key = take(1)[0]
        if key == "DATASET":
            if take(1)[0] != "UNSTRUCTURED_GRID":
                raise ValueError("only UNSTRUCTURED_GRID is supported")
        elif key == "POINTS":
            n, _ = take(2)
            out["points"] = np.array(take(3 * int(n)), dtype=float).reshape(-1, 3)
        elif key == "CELLS":
            m, size = (int(v) for v in take(2))
            raw = np.array(take(size), dtype=int).reshape(m, -1)
            if np.any(raw[:, 0] != 3):
                raise ValueError("non-triangular cell")
            out["cells"] = raw[:, 1:]
        elif key == "CELL_TYPES":
            m = int(take(1)[0])
            out["cell_types"] = np.array(take(m), dtype=int)
        elif key in ("CELL_DATA", "POINT_DATA"):
            count = int(take(1)[0])
            target = out["cell_data" if key == "CELL_DATA" else "point_data"]
        elif key == "SCALARS":
            name, _, ncomp = take(3)
            if take(2)[0] != "LOOKUP_TABLE":
                raise ValueError("expected LOOKUP_TABLE")
            target[name] = np.array(take(count * int(ncomp)), dtype=float)
        elif key == "VECTORS":
            name, _ = take(2)
            target[name] = np.array(take(3 * count), dtype=float).reshape(-1, 3)
        else:
            raise ValueError(f"unexpected keyword {key!r}")
    return out
