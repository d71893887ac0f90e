import numpy as np
import pytest

from rcmodel import events as ev
from rcmodel import lattice as lat


def test_atoms_are_increasing():
    for e in (ev.edge_open(0), ev.connected(0, 1), ev.sets_connected([0], [1]), ev.C_H, ev.ALWAYS):
        assert e.increasing


def test_negation_free_combinations_stay_increasing():
    assert (ev.C_H & ev.C_V).increasing
    assert (ev.C_H | ev.edge_open(2)).increasing


def test_negation_breaks_increasing_tag():
    neg = ~ev.C_H
    assert neg.monotone == ev.DECREASING
    assert (ev.C_H & ~ev.C_V).monotone == ev.UNKNOWN
    assert not (~~ev.C_H).increasing
    with pytest.raises(ev.NotMonotoneError):
        (~~ev.C_H).with_monotone(ev.INCREASING)
    with pytest.raises(ev.NotMonotoneError):
        (ev.C_H & ~ev.C_V).with_monotone(ev.INCREASING)


def test_names():
    assert ev.C_H.name == "C_h" and ev.C_V.name == "C_v"
    assert ev.edge_open(3).name == "open(3)"
    assert (ev.C_H & ev.C_V).named("both").name == "both"


def test_holds_on_grid():
    r = lat.square_box(2, 1)
    cfg = np.zeros(r.n_edges, bool)
    assert ev.ALWAYS.holds(cfg, r) and not ev.NEVER.holds(cfg, r)
    assert not ev.C_H.holds(cfg, r)
    assert ev.C_V.holds(np.ones(r.n_edges, bool), r)
    e = r.edge_index(r.vertex_at(0, 0), r.vertex_at(0, 1))
    cfg[e] = True
    assert ev.C_V.holds(cfg, r)
    assert ev.connected(r.vertex_at(0, 0), r.vertex_at(0, 1)).holds(cfg, r)
    assert (~ev.C_H).holds(cfg, r)


def test_validate_rejects_bad_indices():
    r = lat.square_box(1, 1)
    with pytest.raises(ValueError):
        ev.edge_open(10).validate(r)
    with pytest.raises(ValueError):
        ev.connected(0, 99).validate(r)
    with pytest.raises(ValueError):
        ev.crossing("diagonal")


def test_json_round_trip(tmp_path):
    family = {"a": ev.C_H & ev.edge_open(1), "b": ~ev.C_V, "c": ev.sets_connected([0, 1], [2])}
    path = tmp_path / "events.json"
    ev.dump_family(family, path)
    back = ev.load_family(path)
    r = lat.square_box(1, 1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        cfg = rng.random(r.n_edges) < 0.5
        for k in family:
            assert back[k].holds(cfg, r) == family[k].holds(cfg, r)
    assert back["a"].increasing and not back["b"].increasing


def test_json_monotone_claim_is_checked():
    with pytest.raises(ev.NotMonotoneError):
        ev.from_json({"op": "not", "args": [{"atom": "crossing", "direction": "h"}], "monotone": "increasing"})
    with pytest.raises(ValueError):
        ev.from_json({"atom": "bogus"})
