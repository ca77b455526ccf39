"""Mesh, field and table files.

All numbers are written with ``repr`` (shortest round-trip decimal), so a
write followed by a read reproduces floats bit for bit and identical
inputs give byte-identical files.  Files use LF line endings.
"""

import csv
import io
import math
import os

import numpy as np

from .errors import InputError
from .mesh import TAGS, Mesh

MESH_HEADER = "RELAST-MESH v1"
_CELL_TYPES = {2: 5, 3: 10}   # legacy unstructured-grid triangle / tetrahedron


def fmt(x):
    """Round-trip decimal text of a number; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _write_text(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

def write_mesh(mesh, path):
    lines = [MESH_HEADER, f"{mesh.dim} {mesh.n_nodes} {mesh.n_elements} {mesh.n_facets}"]
    lines += [" ".join(fmt(v) for v in row) for row in mesh.nodes.tolist()]
    lines += [" ".join(str(v) for v in row) for row in mesh.elements.tolist()]
    lines += [" ".join(str(v) for v in row) + f" {tag}"
              for row, tag in zip(mesh.facets.tolist(), mesh.facet_tags.tolist())]
    _write_text(path, lines)


def read_mesh(path):
    """Read a RELAST-MESH v1 file; raises :class:`InputError` with the line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != MESH_HEADER:
        raise InputError(f"expected header {MESH_HEADER!r}", 1)
    try:
        dim, nn, ne, nf = (int(v) for v in lines[1].split())
    except (IndexError, ValueError):
        raise InputError("expected 'dim n_nodes n_elements n_facets'", 2) from None
    if dim not in (2, 3) or min(nn, ne, nf) < 0:
        raise InputError("bad counts", 2)
    if len(lines) != 2 + nn + ne + nf:
        raise InputError(f"expected {2 + nn + ne + nf} lines, found {len(lines)}", len(lines))

    def rows(start, count, width, conv, what):
        out = []
        for k in range(count):
            n = start + k + 1
            parts = lines[start + k].split()
            if len(parts) != width:
                raise InputError(f"{what} line needs {width} entries", n)
            try:
                out.append([conv(p) for p in parts])
            except ValueError:
                raise InputError(f"malformed {what} entry", n) from None
        return out

    nodes = rows(2, nn, dim, float, "node")
    elements = rows(2 + nn, ne, dim + 1, int, "element")
    facets, tags = [], []
    base = 2 + nn + ne
    for k in range(nf):
        n = base + k + 1
        parts = lines[base + k].split()
        if len(parts) != dim + 1:
            raise InputError("facet line needs node indices and a tag", n)
        if parts[-1] not in TAGS:
            raise InputError(f"unknown facet tag {parts[-1]!r}", n)
        try:
            facets.append([int(p) for p in parts[:-1]])
        except ValueError:
            raise InputError("malformed facet entry", n) from None
        tags.append(parts[-1])
    for arr, start, what in ((elements, 2 + nn, "element"), (facets, base, "facet")):
        for k, row in enumerate(arr):
            if any(i < 0 or i >= nn for i in row):
                raise InputError(f"{what} node index out of range", start + k + 1)
    mesh = Mesh(dim, np.array(nodes, dtype=float).reshape(nn, dim),
                np.array(elements, dtype=np.int64).reshape(ne, dim + 1),
                np.array(facets, dtype=np.int64).reshape(nf, dim), np.array(tags, dtype=object))
    return mesh.validate()


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

def write_fields(mesh, fields, path):
    """ASCII legacy unstructured grid with nodal fields.

    ``fields`` maps names to arrays of shape (n_nodes,) (scalars) or
    (n_nodes, dim) (vectors; padded to three components).  Names are
    written in the given order.
    """
    n = mesh.n_nodes
    lines = ["# vtk DataFile Version 3.0", "relast fields", "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {n} double"]
    pad = np.zeros((n, 3))
    pad[:, : mesh.dim] = mesh.nodes
    lines += [" ".join(fmt(v) for v in row) for row in pad.tolist()]
    k = mesh.dim + 1
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (k + 1)}")
    lines += [f"{k} " + " ".join(str(v) for v in row) for row in mesh.elements.tolist()]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(_CELL_TYPES[mesh.dim])] * mesh.n_elements
    checked = []
    for name, values in fields.items():
        if any(c.isspace() for c in name) or not name:
            raise InputError(f"field name {name!r} must be a single word")
        arr = np.asarray(values, dtype=float)
        if arr.shape[0] != n:
            raise InputError(f"field {name!r} has {arr.shape[0]} values for {n} nodes")
        if arr.ndim == 2 and arr.shape[1] == mesh.dim:
            vec = np.zeros((n, 3))
            vec[:, : mesh.dim] = arr
            checked.append((name, "vector", vec))
        elif arr.ndim == 1:
            checked.append((name, "scalar", arr))
        else:
            raise InputError(f"field {name!r} must have shape (n,) or (n, {mesh.dim})")
    if checked:
        lines.append(f"POINT_DATA {n}")
    for name, kind, arr in checked:
        if kind == "vector":
            lines.append(f"VECTORS {name} double")
            lines += [" ".join(fmt(v) for v in row) for row in arr.tolist()]
        else:
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [fmt(v) for v in arr.tolist()]
    _write_text(path, lines)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

CONVERGENCE_HEADER = ("h", "l2_error", "h1_error", "l2_rate", "h1_rate")
REPORT_HEADER = ("iteration", "residual_norm", "step_norm", "ratio", "energy", "min_det")


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(header, rows))


def write_convergence(table, path):
    write_csv(path, CONVERGENCE_HEADER, table.rows())


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in value:
            _flatten(f"{prefix}.{fmt(k) if not isinstance(k, str) else k}" if prefix else str(k),
                     value[k], out)
    elif isinstance(value, (list, tuple)):
        out.append((prefix, " ".join(fmt(v) for v in value)))
    elif isinstance(value, (float, int, np.floating, np.integer, bool, np.bool_)):
        out.append((prefix, fmt(value)))
    elif value is None:
        out.append((prefix, "none"))
    else:
        out.append((prefix, str(value)))


def diagnostics_text(record):
    """Plain ``key = value`` block of a (nested) diagnostics record."""
    pairs = []
    _flatten("", record, pairs)
    return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


def write_report(report, directory, extra=None):
    """Write ``report.csv`` (per-iterate rows) and ``diagnostics.txt``.

    Returns the two paths.
    """
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, "report.csv")
    diag_path = os.path.join(directory, "diagnostics.txt")
    write_csv(csv_path, REPORT_HEADER, report.rows())
    record = {"converged": report.converged, "reason": report.reason,
              "iterations": report.iterations,
              "contraction_estimate": report.contraction_estimate,
              "reference_norm": report.reference_norm,
              "final_min_det": report.min_dets[-1] if report.min_dets else math.nan}
    bounds = report.error_bounds()
    record["error_bounds"] = "none" if bounds is None else bounds
    record["smallness"] = report.diagnostics
    if extra:
        record.update(extra)
    with open(diag_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(diagnostics_text(record))
    return csv_path, diag_path


__all__ = ["read_mesh", "write_mesh", "write_fields", "write_csv", "write_convergence",
           "write_report", "diagnostics_text", "csv_text", "fmt"]
