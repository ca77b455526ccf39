import numpy as np
import pytest

from relast.errors import InputError
from relast.fileio import (CONVERGENCE_HEADER, csv_text, diagnostics_text, fmt, read_mesh,
                           write_fields, write_mesh)
from relast.mesh import Mesh, generate_mesh


def _two_triangles():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    elements = np.array([[0, 1, 2], [0, 2, 3]])
    facets = np.array([[0, 1], [1, 2], [2, 3], [3, 0]])
    return Mesh(2, nodes, elements, facets, ["gamma1", "gamma2", "gamma1", "gamma1"]).validate()


def _parse_vtk(path):
    """Minimal reader of the legacy files written by write_fields."""
    lines = open(path, encoding="utf-8").read().split("\n")
    out, k = {}, 0
    while k < len(lines):
        parts = lines[k].split()
        if parts and parts[0] == "POINTS":
            n = int(parts[1])
            out["points"] = np.array([[float(v) for v in lines[k + 1 + j].split()] for j in range(n)])
            k += n
        elif parts and parts[0] == "CELLS":
            n = int(parts[1])
            out["cells"] = [[int(v) for v in lines[k + 1 + j].split()] for j in range(n)]
            k += n
        elif parts and parts[0] == "CELL_TYPES":
            n = int(parts[1])
            out["types"] = [int(lines[k + 1 + j]) for j in range(n)]
            k += n
        elif parts and parts[0] == "VECTORS":
            n = len(out["points"])
            out[parts[1]] = np.array([[float(v) for v in lines[k + 1 + j].split()] for j in range(n)])
            k += n
        elif parts and parts[0] == "SCALARS":
            n = len(out["points"])
            out[parts[1]] = np.array([float(lines[k + 2 + j]) for j in range(n)])
            k += n + 1
        k += 1
    return out


def test_fmt():
    assert fmt(0.1) == "0.1" and fmt(3) == "3" and fmt(float("nan")) == "nan"
    assert fmt(True) == "true" and fmt(np.float64(1e-300)) == "1e-300"


def test_mesh_round_trip_is_bit_exact(tmp_path):
    mesh = generate_mesh([(0.1, 0.7), (np.pi / 7, 1.0), (0.0, np.e)], [2, 3, 2], ("xmax", "zmin"))
    path = tmp_path / "mesh.txt"
    write_mesh(mesh, path)
    back = read_mesh(path)
    assert np.array_equal(back.nodes, mesh.nodes)
    assert np.array_equal(back.elements, mesh.elements)
    assert np.array_equal(back.facets, mesh.facets)
    assert list(back.facet_tags) == list(mesh.facet_tags)
    assert abs(back.element_volumes().sum() - 0.6 * (1 - np.pi / 7) * np.e) < 1e-14
    write_mesh(back, tmp_path / "again.txt")
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


@pytest.mark.parametrize("edit, line", [
    (lambda L: ["RELAST-MESH v0"] + L[1:], 1),
    (lambda L: L[:1] + ["2 4 2"] + L[2:], 2),
    (lambda L: L[:3] + ["1.0 zero"] + L[4:], 4),
    (lambda L: L[:-1] + ["3 0 gamma3"], 12),
    (lambda L: L[:6] + ["0 1 9"] + L[7:], 7),
])
def test_mesh_reader_errors(tmp_path, edit, line):
    path = tmp_path / "mesh.txt"
    write_mesh(_two_triangles(), path)
    lines = path.read_text().rstrip("\n").split("\n")
    path.write_text("\n".join(edit(lines)) + "\n")
    with pytest.raises(InputError) as exc:
        read_mesh(path)
    assert exc.value.line == line


def test_fields_two_triangle_example(tmp_path):
    mesh = _two_triangles()
    disp = np.array([[0.0, 0.0], [0.1, 0.0], [0.1, -0.2], [0.0, 1 / 3]])
    path = tmp_path / "fields.vtk"
    write_fields(mesh, {"displacement": disp, "energy": np.arange(4.0)}, path)
    text = path.read_text()
    assert "CELLS 2 8" in text and "CELL_TYPES 2" in text
    data = _parse_vtk(path)
    assert data["types"] == [5, 5]
    assert data["cells"] == [[3, 0, 1, 2], [3, 0, 2, 3]]
    assert np.max(np.abs(data["displacement"][:, :2] - disp)) < 1e-15
    assert not np.any(data["displacement"][:, 2])
    assert np.array_equal(data["energy"], np.arange(4.0))


def test_fields_3d_cell_type(tmp_path):
    mesh = generate_mesh([(0, 1)] * 3, [1, 1, 1])
    write_fields(mesh, {"u": np.ones((mesh.n_nodes, 3))}, tmp_path / "f.vtk")
    assert _parse_vtk(tmp_path / "f.vtk")["types"] == [10] * mesh.n_elements


def test_fields_length_mismatch(tmp_path):
    with pytest.raises(InputError, match="3 values for 4 nodes"):
        write_fields(_two_triangles(), {"u": np.zeros((3, 2))}, tmp_path / "f.vtk")


def test_tables():
    text = csv_text(CONVERGENCE_HEADER, [(0.5, 1e-3, 2e-2, float("nan"), float("nan"))])
    assert text == "h,l2_error,h1_error,l2_rate,h1_rate\n0.5,0.001,0.02,nan,nan\n"
    diag = diagnostics_text({"a": 1, "b": {"c": 0.25, "d": [1, 2]}, "e": None})
    assert diag == "a = 1\nb.c = 0.25\nb.d = 1 2\ne = none\n"
