import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcmodel import connectivity as conn
from rcmodel import lattice as lat
from rcmodel.exact import BoundaryCondition


def nx_components(config, region):
    g = nx.Graph()
    g.add_nodes_from(range(region.n_vertices))
    g.add_edges_from(tuple(e) for e, o in zip(region.edges.tolist(), config) if o)
    return [set(c) for c in nx.connected_components(g)]


def nx_crossing(config, region, a, b):
    comps = nx_components(config, region)
    sa, sb = region.side(a), region.side(b)
    return any(c & sa and c & sb for c in comps)


def configs(m):
    return st.lists(st.booleans(), min_size=m, max_size=m).map(np.array)


G33 = lat.square_box(3, 3)
G44 = lat.square_box(4, 4)
G55 = lat.square_box(5, 5)


def test_all_closed_and_all_open_clusters():
    r = G33
    assert conn.clusters(np.zeros(r.n_edges, bool), r).count == r.n_vertices
    part = conn.clusters(np.ones(r.n_edges, bool), r)
    assert part.count == 1
    assert part.sizes.sum() == r.n_vertices


def test_wired_boundary_merges_clusters():
    r = lat.square_box(2, 2)
    bc = BoundaryCondition.wired(r)
    part = conn.clusters(np.zeros(r.n_edges, bool), r, bc)
    assert part.count == 2  # all boundary vertices plus the lone centre


@given(configs(G33.n_edges))
@settings(max_examples=80, deadline=None)
def test_clusters_match_networkx(cfg):
    part = conn.clusters(cfg, G33)
    comps = nx_components(cfg, G33)
    assert part.count == len(comps)
    assert sorted(part.sizes.tolist()) == sorted(len(c) for c in comps)
    assert part.sizes.sum() == G33.n_vertices
    for c in comps:
        assert len({int(part.labels[v]) for v in c}) == 1


@given(configs(G44.n_edges))
@settings(max_examples=80, deadline=None)
def test_crossing_matches_networkx(cfg):
    assert conn.crossing(cfg, G44, "horizontal") == nx_crossing(cfg, G44, "left", "right")
    assert conn.crossing(cfg, G44, "vertical") == nx_crossing(cfg, G44, "bottom", "top")


def test_single_open_column():
    r = G44
    cfg = np.zeros(r.n_edges, bool)
    for y in range(4):
        cfg[r.edge_index(r.vertex_at(2, y), r.vertex_at(2, y + 1))] = True
    assert conn.crossing(cfg, r, "vertical")
    assert not conn.crossing(cfg, r, "horizontal")
    assert conn.count_separated_crossings(cfg, r, "vertical") == 1


def test_two_disjoint_columns_are_separated():
    r = G55
    cfg = np.zeros(r.n_edges, bool)
    for x in (1, 3):
        for y in range(5):
            cfg[r.edge_index(r.vertex_at(x, y), r.vertex_at(x, y + 1))] = True
    assert conn.count_separated_crossings(cfg, r, "vertical") == 2


@given(configs(G44.n_edges))
@settings(max_examples=80, deadline=None)
def test_separated_crossings_match_cluster_scan(cfg):
    comps = nx_components(cfg, G44)
    expected = sum(1 for c in comps if c & G44.side("bottom") and c & G44.side("top"))
    got = conn.count_separated_crossings(cfg, G44, "vertical")
    assert got == expected
    assert (got >= 1) == conn.crossing(cfg, G44, "vertical")


def test_empty_side_raises():
    hexagon = lat.build_region(lat.HEXAGONAL, -1, 1, -1.01, 1.01)
    fake = lat.Region(hexagon.vertices.copy(), hexagon.edges.copy(), hexagon.boundary, hexagon.bbox, {}, "x")
    with pytest.raises(ValueError):
        conn.crossing(np.zeros(fake.n_edges, bool), fake, "horizontal")
    with pytest.raises(ValueError):
        conn.crossing(np.zeros(hexagon.n_edges, bool), hexagon, "diagonal")


def test_config_length_checked():
    with pytest.raises(ValueError):
        conn.clusters(np.zeros(3, bool), G33)


# -- duality -----------------------------------------------------------------


def test_dual_config_involution_and_all_open():
    dm = lat.dual_region(G33)
    cfg = np.ones(G33.n_edges, bool)
    assert not conn.dual_config(cfg, dm).any()
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = rng.random(G33.n_edges) < 0.5
        assert np.array_equal(conn.dual_config(conn.dual_config(c, dm), dm, inverse=True), c)


def test_crossing_complementarity_exhaustive_2x1():
    r = lat.square_box(2, 1)
    dm = lat.dual_region(r)
    for bits in itertools.product((False, True), repeat=r.n_edges):
        cfg = np.array(bits)
        h = conn.crossing(cfg, r, "horizontal")
        d = conn.dual_crossing(conn.dual_config(cfg, dm), dm, "vertical")
        assert h != d


@given(configs(G33.n_edges))
@settings(max_examples=100, deadline=None)
def test_crossing_complementarity_3x3(cfg):
    dm = lat.dual_region(G33)
    assert conn.crossing(cfg, G33, "horizontal") != conn.dual_crossing(conn.dual_config(cfg, dm), dm, "vertical")
    assert conn.crossing(cfg, G33, "vertical") != conn.dual_crossing(conn.dual_config(cfg, dm), dm, "horizontal")


# -- Hamming distance ----------------------------------------------------------


def test_hamming_all_closed_strip():
    r = lat.square_box(3, 1)
    assert conn.hamming_to_crossing(np.zeros(r.n_edges, bool), r, "horizontal") == 3


def test_hamming_zero_iff_crossing_and_single_repair():
    r = lat.square_box(3, 1)
    cfg = np.zeros(r.n_edges, bool)
    path = [r.edge_index(r.vertex_at(x, 0), r.vertex_at(x + 1, 0)) for x in range(3)]
    cfg[path] = True
    assert conn.hamming_to_crossing(cfg, r, "horizontal") == 0
    cfg[path[1]] = False
    assert conn.hamming_to_crossing(cfg, r, "horizontal") == 1


def test_hamming_unreachable_is_infinite_sentinel():
    # two unit squares side by side with the middle column missing: sides never meet
    verts = np.array([[0, 0], [0, 1], [1, 0], [1, 1], [2, 0], [2, 1], [3, 0], [3, 1]], float)
    edges = np.array([[0, 1], [0, 2], [1, 3], [2, 3], [4, 5], [4, 6], [5, 7], [6, 7]])
    sides = {"left": frozenset({0, 1}), "right": frozenset({6, 7}), "bottom": frozenset({0, 2, 4, 6}),
             "top": frozenset({1, 3, 5, 7})}
    r = lat.Region(verts, edges, frozenset(range(8)), (0, 3, 0, 1), sides, "split")
    d = conn.hamming_to_crossing(np.ones(8, bool), r, "horizontal")
    assert d is conn.INFINITE
    assert d != 10**9 and not isinstance(d, int)


@given(configs(lat.square_box(2, 2).n_edges))
@settings(max_examples=40, deadline=None)
def test_hamming_matches_hypercube_bfs(cfg):
    r = lat.square_box(2, 2)
    expected = conn.bfs_hamming(cfg, lambda c: nx_crossing(c, r, "left", "right"))
    assert conn.hamming_to_crossing(cfg, r, "horizontal") == expected


@given(configs(G44.n_edges), st.integers(0, G44.n_edges - 1))
@settings(max_examples=80, deadline=None)
def test_hamming_drops_by_at_most_one_when_opening(cfg, e):
    before = conn.hamming_to_crossing(cfg, G44, "vertical")
    cfg2 = cfg.copy()
    cfg2[e] = True
    after = conn.hamming_to_crossing(cfg2, G44, "vertical")
    assert before - 1 <= after <= before


def test_hypercube_distance_table():
    table = np.zeros(8, bool)
    table[7] = True
    assert conn.hypercube_distance(table).tolist() == [3, 2, 2, 1, 2, 1, 1, 0]


# -- cluster geometry ----------------------------------------------------------


def test_cluster_stats_all_closed_and_all_open():
    r = lat.build_region(lat.SQUARE, -2, 2, -2, 2)
    origin = r.vertex_at(0, 0)
    assert conn.cluster_stats(np.zeros(r.n_edges, bool), r, origin)[:2] == (1, 0)
    size, radius, touches = conn.cluster_stats(np.ones(r.n_edges, bool), r, origin)
    assert size == r.n_vertices and radius == 2
    assert touches == {"left", "right", "bottom", "top"}


@given(configs(G44.n_edges), st.integers(0, 24))
@settings(max_examples=80, deadline=None)
def test_cluster_stats_match_networkx(cfg, origin):
    comp = next(c for c in nx_components(cfg, G44) if origin in c)
    size, radius, _ = conn.cluster_stats(cfg, G44, origin)
    x0, y0 = G44.vertices[origin]
    expected = max(max(abs(G44.vertices[v][0] - x0), abs(G44.vertices[v][1] - y0)) for v in comp)
    assert size == len(comp)
    assert radius == int(expected)
