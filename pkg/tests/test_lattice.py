import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcmodel import lattice as lat

# Counts below come from a brute-force rasterizer that lists lattice points in
# the box and joins every pair at unit distance (computed once, frozen here).
RASTER_COUNTS = [
    (lat.TRIANGULAR, (0, 4, 0, 4), 23, 50),
    (lat.TRIANGULAR, (0, 1.6, 0, 1.8), 6, 9),
    (lat.HEXAGONAL, (-1, 2.6, -1.01, 1.01), 10, 11),
    (lat.HEXAGONAL, (-3, 3, -3, 3), 28, 34),
    (lat.SQUARE, (0, 3, 0, 2), 12, 17),
]


@pytest.mark.parametrize("lattice,box,nv,ne", RASTER_COUNTS)
def test_region_counts_match_raster_oracle(lattice, box, nv, ne):
    r = lat.build_region(lattice, *box)
    assert (r.n_vertices, r.n_edges) == (nv, ne)


def test_square_rectangle_sides_and_boundary():
    r = lat.square_box(2, 1)
    assert r.n_vertices == 6 and r.n_edges == 7
    left = {r.vertex_at(0, 0), r.vertex_at(0, 1)}
    assert r.side("left") == left
    assert r.side("right") == {r.vertex_at(2, 0), r.vertex_at(2, 1)}
    assert r.side("bottom") == {r.vertex_at(x, 0) for x in range(3)}
    assert r.boundary == frozenset(range(6))


def test_interior_vertex_not_on_boundary():
    r = lat.square_box(2, 2)
    assert r.vertex_at(1, 1) not in r.boundary
    assert len(r.boundary) == 8


def test_empty_region_raises():
    with pytest.raises(lat.RegionError):
        lat.build_region(lat.HEXAGONAL, 0.01, 0.02, 0.01, 0.02)
    with pytest.raises(ValueError):
        lat.build_region(lat.SQUARE, 1, 0, 0, 1)


def test_edges_are_sorted_pairs_of_unit_length():
    for lattice, box, *_ in RASTER_COUNTS:
        r = lat.build_region(lattice, *box)
        assert np.all(r.edges[:, 0] < r.edges[:, 1])
        d = np.linalg.norm(r.vertices[r.edges[:, 0]] - r.vertices[r.edges[:, 1]], axis=1)
        assert np.allclose(d, 1.0)


def test_builtin_cells_have_symmetries():
    for spec in lat.BUILTIN_LATTICES.values():
        assert lat.symmetry_report(spec.cell) == []


def test_custom_cell_without_rotation_symmetry_warns():
    cell = lat.UnitCell(vertices=((0, 0),), edge_generators=((0, 0, 1, 0), (0, 0, 0, 1)),
                        periods=((1, 0), (0, 2)))
    with pytest.warns(UserWarning):
        lat.LatticeSpec.custom(cell)


def test_crossing_generators_rejected():
    with pytest.raises(lat.EmbeddingError):
        lat.UnitCell(vertices=((0, 0),), edge_generators=((0, 0, 1, 1), (0, 0, -1, 1)),
                     periods=((1, 0), (0, 1)))


def test_collinear_periods_rejected():
    with pytest.raises(ValueError):
        lat.UnitCell(vertices=((0, 0),), edge_generators=((0, 0, 1, 0),), periods=((1, 0), (2, 0)))


def test_unit_cell_json_round_trip(tmp_path):
    path = tmp_path / "cell.json"
    import json

    path.write_text(json.dumps(lat.HEXAGONAL_CELL.to_json()))
    assert lat.UnitCell.from_json(path) == lat.HEXAGONAL_CELL


def test_edge_list_export(tmp_path):
    r = lat.square_box(1, 1)
    path = tmp_path / "edges.txt"
    r.export_edge_list(path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    assert lines[0].split()[:2] == [str(r.edges[0][0]), str(r.edges[0][1])]


@pytest.mark.parametrize("lattice,box,nv,ne", RASTER_COUNTS)
def test_dual_euler_and_single_outer_vertex(lattice, box, nv, ne):
    r = lat.build_region(lattice, *box)
    dm = lat.dual_region(r)
    assert nv - ne + dm.n_faces == 2
    assert dm.dual_region.n_vertices == dm.n_faces
    assert dm.dual_region.n_edges == ne
    assert dm.dual_region.boundary == frozenset({dm.outer})
    assert sorted(dm.inverse_pairs[dm.edge_pairs].tolist()) == list(range(ne))


def test_dual_of_unit_square_is_four_parallel_edges():
    dm = lat.dual_region(lat.square_box(1, 1))
    assert dm.n_faces == 2
    assert {tuple(e) for e in dm.dual_region.edges} == {(0, 1)}
    assert sorted(dm.arcs) == ["east", "north", "south", "west"]


def test_dual_arcs_of_two_by_one_grid():
    r = lat.square_box(2, 1)
    dm = lat.dual_region(r)
    names = {}
    for k, (u, v) in enumerate(r.edges):
        names[(tuple(r.vertices[u]), tuple(r.vertices[v]))] = dm.arcs[k]
    assert names[((0.0, 0.0), (0.0, 1.0))] == "west"
    assert names[((2.0, 0.0), (2.0, 1.0))] == "east"
    assert names[((1.0, 0.0), (1.0, 1.0))] == ""
    assert names[((0.0, 1.0), (1.0, 1.0))] == "north"


def test_disconnected_or_tree_region_has_no_dual():
    path = lat.build_region(lat.SQUARE, 0, 2, 0, 0.5)
    with pytest.raises(lat.RegionError):
        lat.dual_region(path)


# -- critical points ---------------------------------------------------------


@pytest.mark.parametrize("q", [1.0, 2.0, 3.0, 4.0])
def test_square_self_dual_point(q):
    pc = lat.solve_critical_point("square", q)
    assert pc == pytest.approx(math.sqrt(q) / (1 + math.sqrt(q)), abs=1e-15)
    assert abs(lat.pstar(pc, q) - pc) < 1e-14


def test_critical_points_q1():
    # q=1: triangular 2 sin(pi/18), hexagonal 1 - 2 sin(pi/18)
    s = 2 * math.sin(math.pi / 18)
    assert lat.solve_critical_point("triangular", 1) == pytest.approx(s, abs=1e-12)
    assert lat.solve_critical_point("hexagonal", 1) == pytest.approx(1 - s, abs=1e-12)
    assert lat.solve_critical_point("square", 2) == pytest.approx(0.585786437626905, abs=1e-12)


@given(st.floats(1.0, 50.0))
@settings(max_examples=60, deadline=None)
def test_triangular_and_hexagonal_points_are_dual(q):
    tri = lat.solve_critical_point("triangular", q)
    hexa = lat.solve_critical_point("hexagonal", q)
    assert abs(lat.pstar(tri, q) - hexa) < 1e-10


@given(st.floats(0.0, 1.0), st.floats(0.05, 20.0))
@settings(max_examples=100, deadline=None)
def test_pstar_is_an_involution(p, q):
    assert lat.pstar(lat.pstar(p, q), q) == pytest.approx(p, abs=1e-12)


def test_pstar_and_critical_point_validate_inputs():
    with pytest.raises(ValueError):
        lat.pstar(1.5, 2)
    with pytest.raises(ValueError):
        lat.pstar(0.5, 0)
    with pytest.raises(ValueError):
        lat.solve_critical_point("square", 0.5)
    with pytest.raises(ValueError):
        lat.solve_critical_point("kagome", 2)
