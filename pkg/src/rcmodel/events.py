"""Composable events on edge configurations.

Events are small predicate trees over the atoms

* ``edge_open(e)``
* ``connected(u, v)`` and ``sets_connected(A, B)``
* ``crossing("horizontal" | "vertical")``
* ``ALWAYS`` / ``NEVER``

combined with ``&``, ``|`` and ``~``.  Every event carries a monotonicity
tag.  A tree without negations built from increasing atoms is tagged
increasing automatically; asking for ``increasing`` on a tree that contains
a negation is rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .connectivity import side_pair
from .lattice import Region

INCREASING = "increasing"
DECREASING = "decreasing"
UNKNOWN = "unknown"


class NotMonotoneError(ValueError):
    """An operation needs an increasing event and got something else."""


@dataclass(frozen=True)
class Event:
    op: str
    args: tuple = ()
    monotone: str = UNKNOWN
    label: str = ""

    # -- construction -----------------------------------------------------
    def __and__(self, other: "Event") -> "Event":
        return all_of(self, other)

    def __or__(self, other: "Event") -> "Event":
        return any_of(self, other)

    def __invert__(self) -> "Event":
        return negate(self)

    def named(self, label: str) -> "Event":
        return Event(self.op, self.args, self.monotone, label)

    def with_monotone(self, monotone: str) -> "Event":
        """Override the tag; ``increasing`` is only accepted when it is provable."""
        if monotone not in (INCREASING, DECREASING, UNKNOWN):
            raise ValueError(f"unknown monotonicity {monotone!r}")
        if monotone == INCREASING and _infer(self) != INCREASING:
            raise NotMonotoneError(f"{self.name} is not a negation-free tree of increasing atoms")
        if monotone == DECREASING and _infer(self) != DECREASING:
            raise NotMonotoneError(f"{self.name} is not provably decreasing")
        return Event(self.op, self.args, monotone, self.label)

    @property
    def increasing(self) -> bool:
        return self.monotone == INCREASING

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.op == "edge":
            return f"open({self.args[0]})"
        if self.op == "connected":
            return f"conn({self.args[0]},{self.args[1]})"
        if self.op == "sets":
            return f"sets({len(self.args[0])},{len(self.args[1])})"
        if self.op == "crossing":
            return "C_h" if self.args[0] == "horizontal" else "C_v"
        if self.op in ("true", "false"):
            return self.op
        if self.op == "not":
            return f"not({self.args[0].name})"
        return f"{self.op}(" + ",".join(a.name for a in self.args) + ")"

    def atoms(self):
        if self.op in ("and", "or", "not"):
            for a in self.args:
                yield from a.atoms()
        else:
            yield self

    # -- evaluation -------------------------------------------------------
    def evaluate(self, bits: np.ndarray, labels: np.ndarray, region: Region) -> np.ndarray:
        """Vectorised truth values for a batch of configurations.

        ``bits`` has shape (B, E) and ``labels`` (B, V) holds cluster labels
        of the open subgraph (no boundary wiring).
        """
        op = self.op
        if op == "edge":
            return bits[:, self.args[0]].astype(bool)
        if op == "connected":
            u, v = self.args
            return labels[:, u] == labels[:, v]
        if op == "sets":
            a, b = np.asarray(self.args[0]), np.asarray(self.args[1])
            return _any_shared(labels, a, b)
        if op == "crossing":
            a, b = side_pair(region, self.args[0])
            return _any_shared(labels, a, b)
        if op == "true":
            return np.ones(len(bits), dtype=bool)
        if op == "false":
            return np.zeros(len(bits), dtype=bool)
        if op == "not":
            return ~self.args[0].evaluate(bits, labels, region)
        parts = [a.evaluate(bits, labels, region) for a in self.args]
        if op == "and":
            return np.logical_and.reduce(parts)
        if op == "or":
            return np.logical_or.reduce(parts)
        raise ValueError(f"unknown event op {op!r}")

    def holds(self, config, region: Region, labels=None) -> bool:
        from .connectivity import labels_of

        config = np.asarray(config, dtype=bool)
        if labels is None:
            labels = labels_of(config, region)
        return bool(self.evaluate(config[None, :], np.asarray(labels)[None, :], region)[0])

    def validate(self, region: Region) -> None:
        for atom in self.atoms():
            if atom.op == "edge" and not 0 <= atom.args[0] < region.n_edges:
                raise ValueError(f"edge {atom.args[0]} not in region")
            if atom.op == "connected" and not all(0 <= v < region.n_vertices for v in atom.args):
                raise ValueError(f"vertices {atom.args} not in region")
            if atom.op == "crossing":
                side_pair(region, atom.args[0])

    # -- serialisation ----------------------------------------------------
    def to_json(self):
        if self.op == "edge":
            return {"atom": "edge", "edge": self.args[0]}
        if self.op == "connected":
            return {"atom": "connected", "u": self.args[0], "v": self.args[1]}
        if self.op == "sets":
            return {"atom": "sets", "A": list(self.args[0]), "B": list(self.args[1])}
        if self.op == "crossing":
            return {"atom": "crossing", "direction": self.args[0]}
        if self.op in ("true", "false"):
            return {"atom": self.op}
        return {"op": self.op, "args": [a.to_json() for a in self.args]}


def _any_shared(labels: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    la = labels[:, a][:, :, None]
    lb = labels[:, b][:, None, :]
    return (la == lb).any(axis=(1, 2))


def _infer(ev: Event) -> str:
    # increasing only for negation-free trees, never via double negation
    if ev.op in ("edge", "connected", "sets", "crossing", "true", "false"):
        return INCREASING
    if ev.op == "not":
        return DECREASING if _infer(ev.args[0]) == INCREASING else UNKNOWN
    tags = {_infer(a) for a in ev.args}
    if len(tags) == 1 and tags != {UNKNOWN}:
        return tags.pop()
    return UNKNOWN


def _make(op, args, label=""):
    ev = Event(op, tuple(args), UNKNOWN, label)
    return Event(op, tuple(args), _infer(ev), label)


def edge_open(e: int) -> Event:
    return _make("edge", (int(e),))


def connected(u: int, v: int) -> Event:
    return _make("connected", (int(u), int(v)))


def sets_connected(a, b) -> Event:
    return _make("sets", (tuple(int(x) for x in a), tuple(int(x) for x in b)))


def crossing(direction: str) -> Event:
    direction = {"h": "horizontal", "v": "vertical"}.get(direction, direction)
    if direction not in ("horizontal", "vertical"):
        raise ValueError(f"bad crossing direction {direction!r}")
    return _make("crossing", (direction,))


def all_of(*events: Event) -> Event:
    return _make("and", events)


def any_of(*events: Event) -> Event:
    return _make("or", events)


def negate(event: Event) -> Event:
    return _make("not", (event,))


ALWAYS = _make("true", ())
NEVER = _make("false", ())
C_H = crossing("horizontal")
C_V = crossing("vertical")


def from_json(tree) -> Event:
    if "atom" in tree:
        kind = tree["atom"]
        if kind == "edge":
            ev = edge_open(tree["edge"])
        elif kind == "connected":
            ev = connected(tree["u"], tree["v"])
        elif kind == "sets":
            ev = sets_connected(tree["A"], tree["B"])
        elif kind == "crossing":
            ev = crossing(tree["direction"])
        elif kind == "true":
            ev = ALWAYS
        elif kind == "false":
            ev = NEVER
        else:
            raise ValueError(f"unknown atom {kind!r}")
    else:
        args = [from_json(a) for a in tree["args"]]
        op = tree["op"]
        if op == "and":
            ev = all_of(*args)
        elif op == "or":
            ev = any_of(*args)
        elif op == "not":
            if len(args) != 1:
                raise ValueError("'not' takes exactly one argument")
            ev = negate(args[0])
        else:
            raise ValueError(f"unknown op {op!r}")
    if "monotone" in tree:
        ev = ev.with_monotone(tree["monotone"])
    return ev


def load_family(path) -> dict[str, Event]:
    """Read ``{"events": {name: tree, ...}}`` (or a bare name->tree mapping)."""
    doc = json.loads(Path(path).read_text())
    doc = doc.get("events", doc)
    return {name: from_json(tree).named(name) for name, tree in doc.items()}


def dump_family(events: dict[str, Event], path) -> None:
    Path(path).write_text(json.dumps({"events": {k: v.to_json() for k, v in events.items()}}, indent=2))
