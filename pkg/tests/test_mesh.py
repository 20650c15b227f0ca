import math

import numpy as np
import pytest

from Torus.Errors import InvalidAngles, InvalidArgument
from Torus.Mesh import (AngleStructure, CellDecomposition, TorusTriangulation,
                        build_lattice_torus, contractible_dual_cycles, lattice_loops,
                        load_mesh, save_mesh, uniform_angle_structure,
                        validate_angle_structure, validate_triangulation)
from Utilities.Serializer import dumps
from tests.conftest import EQUILATERAL, QUAD_CELLS, RIGHT


@pytest.mark.parametrize("p, q, counts", [(2, 2, (4, 12, 8)), (4, 4, (16, 48, 32)), (3, 5, (15, 45, 30))])
def test_lattice_counts(p, q, counts):
    mesh = build_lattice_torus(p, q)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == counts
    assert mesh.euler_characteristic == 0


def test_lattice_regularity():
    mesh = build_lattice_torus(3, 5)
    assert all(mesh.degree(v) == 6 for v in range(mesh.n_vertices))
    classes = mesh.edge_class[mesh.edge_halfedge]
    assert [int(np.sum(classes == c)) for c in (1, 2, 3)] == [15, 15, 15]


@pytest.mark.parametrize("p, q", [(1, 4), (4, 1), (0, 0), (2.5, 3)])
def test_lattice_rejects_small_periods(p, q):
    with pytest.raises(InvalidArgument):
        build_lattice_torus(p, q)


@pytest.mark.parametrize("p, q", [(2, 2), (3, 3), (4, 4), (3, 5)])
def test_lattice_passes_validation(p, q):
    report = validate_triangulation(build_lattice_torus(p, q))
    assert report.passed, report.first_failure


def test_halfedge_structure(lattice):
    h = np.arange(lattice.n_halfedges)
    assert np.all(lattice.next[lattice.next[lattice.next]] == h)
    assert np.all(lattice.twin[lattice.twin] == h)
    assert np.all(lattice.crossing[lattice.twin] == -lattice.crossing)
    assert np.all(lattice.dual_shift[lattice.twin] == -lattice.dual_shift)


def test_generator_loop_totals(lattice):
    assert lattice.loop_crossing(lattice.gamma1_primal) == (1, 0)
    assert lattice.loop_crossing(lattice.gamma2_primal) == (0, 1)
    assert lattice.dual_loop_shift(lattice.gamma1_dual) == (1, 0)
    assert lattice.dual_loop_shift(lattice.gamma2_dual) == (0, 1)


def test_loops_through_other_rows_validate():
    base = build_lattice_torus(4, 3)
    loops = lattice_loops(4, 3, row=2, column=1)
    mesh = TorusTriangulation(base.n_vertices, base.faces, base.crossing, loops["gamma1_primal"],
                              loops["gamma2_primal"], loops["gamma1_dual"], loops["gamma2_dual"],
                              base.edge_class[np.arange(base.n_halfedges)])
    report = validate_triangulation(mesh)
    assert report.passed, report.first_failure


def test_corrupted_twin_names_the_halfedge():
    mesh = build_lattice_torus(3, 3)
    mesh.twin[0] = 5
    report = validate_triangulation(mesh)
    assert not report.passed
    failure = report.first_failure
    assert failure.name == "twin is an involution"
    assert "halfedge 0" in failure.detail


def test_open_face_fails_crossing_closure():
    base = build_lattice_torus(3, 3)
    crossing = base.crossing.copy()
    crossing[4] += (1, 0)
    mesh = TorusTriangulation(base.n_vertices, base.faces, crossing, base.gamma1_primal, base.gamma2_primal,
                              base.gamma1_dual, base.gamma2_dual)
    report = validate_triangulation(mesh)
    closure = [c for c in report.checks if c.name == "face crossing closure"]
    assert closure and not closure[0].passed
    assert "face 1" in closure[0].detail


@pytest.mark.parametrize("thetas", [EQUILATERAL, RIGHT, QUAD_CELLS])
def test_uniform_angles_satisfy_vertex_sums(lattice, thetas):
    angles = uniform_angle_structure(lattice, *thetas)
    assert np.allclose(angles.vertex_sums(), 2 * math.pi, atol=1e-12)


def test_uniform_angles_assign_by_class(lattice):
    angles = uniform_angle_structure(lattice, *RIGHT)
    classes = lattice.edge_class[lattice.edge_halfedge]
    assert np.all(angles.theta[classes == 1] == math.pi / 2)
    assert np.all(angles.theta[classes == 3] == math.pi / 4)


def test_uniform_angles_reject_bad_sum(lattice):
    with pytest.raises(InvalidAngles):
        uniform_angle_structure(lattice, 1.0, 1.0, 1.0)


def test_uniform_angles_need_class_tags():
    base = build_lattice_torus(3, 3)
    untagged = TorusTriangulation(base.n_vertices, base.faces, base.crossing, base.gamma1_primal,
                                  base.gamma2_primal, base.gamma1_dual, base.gamma2_dual)
    with pytest.raises(InvalidAngles):
        uniform_angle_structure(untagged, *EQUILATERAL)


def test_equilateral_structure_is_valid(lattice, equilateral):
    report = validate_angle_structure(lattice, equilateral, max_cycle_len=8)
    assert report.passed, report.first_failure
    assert report.cycles_checked > 0
    assert any("not enumerated" in note for note in report.notes)


def test_short_vertex_sum_fails_condition_one(lattice, equilateral):
    theta = equilateral.theta.copy()
    theta[0] -= 0.1
    report = validate_angle_structure(lattice, AngleStructure(lattice, theta), max_cycle_len=6)
    assert report.first_failure.name.startswith("condition (i)")


def test_hexagons_are_vertex_stars(lattice):
    cycles = contractible_dual_cycles(lattice, 6)
    stars = {frozenset(int(lattice.edge_of[h]) for h in lattice.outgoing(v)) for v in range(lattice.n_vertices)}
    assert len(cycles) == lattice.n_vertices
    assert all(frozenset(int(lattice.edge_of[h]) for h in c) in stars for c in cycles)
    assert all(len(c) == 6 for c in cycles)


def test_zero_angle_edges_merge_faces(lattice):
    angles = uniform_angle_structure(lattice, *QUAD_CELLS)
    cells = CellDecomposition(lattice, angles)
    assert cells.n_cells == lattice.n_faces // 2
    assert all(len(cycle) == 4 for cycle in cells.boundary)
    assert cells.inconsistent == []
    assert np.all(cells.cell_shift[cells.zero] == 0)


def test_cells_without_zero_angles_are_faces(lattice, equilateral):
    cells = CellDecomposition(lattice, equilateral)
    assert cells.n_cells == lattice.n_faces
    assert np.array_equal(cells.cell_shift, lattice.dual_shift)


def test_mesh_document_round_trip(tmp_path, lattice):
    path = save_mesh(lattice, str(tmp_path / "mesh.json"))
    first = (tmp_path / "mesh.json").read_text(encoding="utf-8")
    save_mesh(load_mesh(path), str(tmp_path / "again.json"))
    assert (tmp_path / "again.json").read_text(encoding="utf-8") == first
    assert first == dumps(lattice.to_dict())
