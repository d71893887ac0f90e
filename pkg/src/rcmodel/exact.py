"""Exact random-cluster and Potts quantities by exhaustive enumeration.

Configuration index ``i`` encodes edge ``k`` as bit ``k`` of ``i``.  For a
region and boundary condition an :class:`Enumeration` computes, once, the
number of open edges and the number of clusters of every configuration (with
the boundary blocks wired).  In the homogeneous mode the weight only depends
on that pair, so sums reduce to integer histograms over ``(o, k)`` followed by
a short compensated sum; this makes the result independent of how the index
space was split into blocks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from . import connectivity as conn
from .events import Event, NotMonotoneError
from .lattice import Region

ENUMERATION_CAP = 24
HAMMING_CAP = 16
POTTS_CAP = 20_000_000
BLOCK = 1 << 16


class CapacityError(ValueError):
    """The requested enumeration exceeds a hard size cap."""


@dataclass(frozen=True)
class BoundaryCondition:
    """Partition of a region's boundary vertices into wired blocks."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(v) for v in b)) for b in self.blocks if len(b)))
        seen = set()
        for b in blocks:
            if seen & set(b):
                raise ValueError("boundary blocks overlap")
            seen |= set(b)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def free(cls, region: Region) -> "BoundaryCondition":
        return cls(tuple((v,) for v in sorted(region.boundary)))

    @classmethod
    def wired(cls, region: Region) -> "BoundaryCondition":
        return cls((tuple(sorted(region.boundary)),) if region.boundary else ())

    @classmethod
    def custom(cls, region: Region, blocks) -> "BoundaryCondition":
        bc = cls(tuple(tuple(b) for b in blocks))
        bc.check(region)
        return bc

    @classmethod
    def named(cls, region: Region, name: str) -> "BoundaryCondition":
        name = name.lower()
        if name in ("free", "0"):
            return cls.free(region)
        if name in ("wired", "1"):
            return cls.wired(region)
        raise ValueError(f"unknown boundary condition {name!r}")

    @property
    def support(self) -> frozenset:
        return frozenset(v for b in self.blocks for v in b)

    def check(self, region: Region) -> None:
        if self.support != region.boundary:
            raise ValueError("boundary condition blocks must cover exactly the region boundary")

    def coarser_than(self, other: "BoundaryCondition") -> bool:
        """True when every block of ``other`` sits inside a block of ``self``."""
        where = {v: i for i, b in enumerate(self.blocks) for v in b}
        return all(len({where.get(v, ("solo", v)) for v in b}) == 1 for b in other.blocks)

    def label(self) -> str:
        if all(len(b) == 1 for b in self.blocks):
            return "free"
        if len(self.blocks) == 1:
            return "wired"
        return "custom"


@dataclass(frozen=True)
class RCParams:
    """Either a homogeneous edge weight ``p`` or ``beta`` with couplings ``J``."""

    q: float
    p: float | None = None
    beta: float | None = None
    J: tuple | None = None

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError(f"cluster weight must be positive, got {self.q}")
        if (self.p is None) == (self.beta is None):
            raise ValueError("give exactly one of p or beta")
        if self.p is not None:
            if not 0.0 <= self.p <= 1.0:
                raise ValueError(f"p must lie in [0, 1], got {self.p}")
        else:
            if self.beta < 0:
                raise ValueError("beta must be non-negative")
            if self.J is None or any(j <= 0 for j in self.J):
                raise ValueError("weighted mode needs strictly positive couplings J")
            object.__setattr__(self, "J", tuple(float(j) for j in self.J))

    @classmethod
    def weighted(cls, beta: float, J, q: float) -> "RCParams":
        return cls(q=q, beta=beta, J=tuple(J))

    @property
    def homogeneous(self) -> bool:
        return self.p is not None

    def edge_probs(self, m: int) -> np.ndarray:
        if self.homogeneous:
            return np.full(m, self.p)
        self._check_len(m)
        return -np.expm1(-self.beta * np.asarray(self.J))

    def edge_factors(self, m: int) -> np.ndarray:
        """``e^{beta J_e} - 1`` per edge (weighted mode)."""
        self._check_len(m)
        return np.expm1(self.beta * np.asarray(self.J))

    def with_p(self, p: float) -> "RCParams":
        return RCParams(q=self.q, p=p)

    def _check_len(self, m):
        if self.J is None or len(self.J) != m:
            raise ValueError(f"need {m} couplings, got {0 if self.J is None else len(self.J)}")

    def label(self) -> str:
        return f"p={self.p!r}" if self.homogeneous else f"beta={self.beta!r}"


@numba.njit(cache=True, nogil=True)
def _root(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@numba.njit(cache=True, nogil=True)
def _features(n, edges, wiring, start, stop, want_labels):
    size = stop - start
    n_open = np.empty(size, dtype=np.int16)
    n_clusters = np.empty(size, dtype=np.int16)
    labels = np.empty((size if want_labels else 0, n), dtype=np.int16)
    parent = np.empty(n, dtype=np.int64)
    m = edges.shape[0]
    for t in range(size):
        idx = start + t
        for i in range(n):
            parent[i] = i
        o = 0
        comps = n
        for e in range(m):
            if (idx >> e) & 1:
                o += 1
                a = _root(parent, edges[e, 0])
                b = _root(parent, edges[e, 1])
                if a != b:
                    parent[a] = b
                    comps -= 1
        if want_labels:
            for i in range(n):
                labels[t, i] = _root(parent, i)
        for w in range(wiring.shape[0]):
            a = _root(parent, wiring[w, 0])
            b = _root(parent, wiring[w, 1])
            if a != b:
                parent[a] = b
                comps -= 1
        n_open[t] = o
        n_clusters[t] = comps
    return n_open, n_clusters, labels


@numba.njit(cache=True, nogil=True)
def _crossing_hamming_all(n, m, indptr, nbr, nbr_edge, side_a, side_b, start, stop):
    out = np.empty(stop - start, dtype=np.int64)
    is_open = np.zeros(m, dtype=np.bool_)
    for t in range(stop - start):
        idx = start + t
        for e in range(m):
            is_open[e] = (idx >> e) & 1
        out[t] = conn._zero_one_bfs(n, indptr, nbr, nbr_edge, is_open, side_a, side_b)
    return out


def index_bits(start: int, stop: int, m: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(m)) & 1).astype(bool)


def config_index(config) -> int:
    config = np.asarray(config, dtype=bool)
    return int(np.dot(config.astype(np.int64), 1 << np.arange(len(config), dtype=np.int64)))


class Enumeration:
    """Per-configuration features of a (region, boundary condition) pair."""

    def __init__(self, region: Region, bc: BoundaryCondition, n_blocks: int | None = None,
                 workers: int = 1, cap: int = ENUMERATION_CAP):
        m = region.n_edges
        if m > cap:
            raise CapacityError(f"{m} edges exceeds the enumeration cap of {cap}")
        bc.check(region)
        self.region, self.bc, self.m, self.n = region, bc, m, region.n_vertices
        self.size = 1 << m
        if n_blocks is None:
            n_blocks = max(1, self.size // BLOCK)
        bounds = np.linspace(0, self.size, min(n_blocks, self.size) + 1).astype(np.int64)
        self.bounds = list(zip(bounds[:-1].tolist(), bounds[1:].tolist()))
        self._wiring = conn.wiring_pairs(bc.blocks)
        keep_labels = self.size * self.n <= (1 << 24)

        def run(span):
            return _features(self.n, region.edges, self._wiring, span[0], span[1], keep_labels)

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(run, self.bounds))
        else:
            parts = [run(span) for span in self.bounds]
        self.n_open = np.concatenate([p[0] for p in parts])
        self.n_clusters = np.concatenate([p[1] for p in parts])
        self._labels = np.concatenate([p[2] for p in parts]) if keep_labels else None
        self.group = self.n_open.astype(np.int64) * (self.n + 1) + self.n_clusters
        self.n_groups = (m + 1) * (self.n + 1)
        go, gk = np.divmod(np.arange(self.n_groups), self.n + 1)
        self._group_open, self._group_clusters = go, gk
        self._events = {}
        self._hamming = {}
        self._weight_cache = None

    # -- per-configuration data -------------------------------------------
    def labels(self, start: int, stop: int) -> np.ndarray:
        if self._labels is not None:
            return self._labels[start:stop]
        free = np.zeros((0, 2), dtype=np.int64)
        return _features(self.n, self.region.edges, free, start, stop, True)[2]

    def indicator(self, event: Event) -> np.ndarray:
        if event not in self._events:
            event.validate(self.region)
            parts = []
            for start, stop in self.bounds:
                bits = index_bits(start, stop, self.m)
                parts.append(event.evaluate(bits, self.labels(start, stop), self.region))
            self._events[event] = np.concatenate(parts)
        return self._events[event]

    def edge_state(self, e: int) -> np.ndarray:
        return ((np.arange(self.size, dtype=np.int64) >> e) & 1).astype(bool)

    def hamming(self, event: Event) -> np.ndarray:
        """Hamming distance from every configuration to ``event`` (-1: unreachable)."""
        if event in self._hamming:
            return self._hamming[event]
        if event.op in ("crossing", "sets"):
            if event.op == "crossing":
                a, b = conn.side_pair(self.region, event.args[0])
            else:
                a, b = (np.array(x, dtype=np.int64) for x in event.args)
            indptr, nbr, eid = conn.adjacency(self.region)
            dist = np.concatenate([
                _crossing_hamming_all(self.n, self.m, indptr, nbr, eid, a, b, start, stop)
                for start, stop in self.bounds
            ])
        else:
            if self.m > HAMMING_CAP:
                raise CapacityError(f"generic Hamming distance is capped at {HAMMING_CAP} edges")
            dist = conn.hypercube_distance(self.indicator(event))
        self._hamming[event] = dist
        return dist

    # -- weights and sums -------------------------------------------------
    def group_weights(self, params: RCParams) -> np.ndarray:
        p, q = params.p, params.q
        o, k = self._group_open, self._group_clusters
        return p ** o * (1.0 - p) ** (self.m - o) * float(q) ** k

    def weights(self, params: RCParams) -> np.ndarray:
        """Unnormalised weight of every configuration."""
        if params.homogeneous:
            return self.group_weights(params)[self.group]
        if self._weight_cache is not None and self._weight_cache[0] == params:
            return self._weight_cache[1]
        w = float(params.q) ** self.n_clusters.astype(np.float64)
        factors = params.edge_factors(self.m)
        for e in range(self.m):
            w = w * np.where(self.edge_state(e), factors[e], 1.0)
        self._weight_cache = (params, w)
        return w

    def total(self, params: RCParams, values=None) -> float:
        """Compensated sum of ``values * weight`` over all configurations."""
        if params.homogeneous:
            if values is None:
                hist = np.bincount(self.group, minlength=self.n_groups).astype(np.float64)
            else:
                hist = np.bincount(self.group, weights=np.asarray(values, dtype=np.float64),
                                   minlength=self.n_groups)
            return math.fsum((hist * self.group_weights(params)).tolist())
        w = self.weights(params)
        if values is not None:
            w = w * np.asarray(values, dtype=np.float64)
        return math.fsum(w.tolist())

    def partition_function(self, params: RCParams) -> float:
        return self.total(params)

    def probability(self, mask, params: RCParams) -> float:
        z = self.total(params)
        return self.total(params, mask) / z

    def expectation(self, values, params: RCParams) -> float:
        return self.total(params, values) / self.total(params)

    def distribution(self, params: RCParams) -> np.ndarray:
        """Probability of every configuration index."""
        return self.weights(params) / self.total(params)


@lru_cache(maxsize=128)
def engine(region: Region, bc: BoundaryCondition) -> Enumeration:
    """Cached :class:`Enumeration` for a region/boundary pair."""
    return Enumeration(region, bc)


def _bc(region: Region, bc) -> BoundaryCondition:
    if bc is None:
        return BoundaryCondition.free(region)
    if isinstance(bc, str):
        return BoundaryCondition.named(region, bc)
    return bc


def cluster_count(config, region: Region, bc: BoundaryCondition | None = None) -> int:
    """Number of clusters of the configuration with boundary blocks identified."""
    bc = _bc(region, bc)
    return conn.clusters(config, region, bc).count


def weight(config, region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> float:
    config = conn.as_config(config, region.n_edges)
    bc = _bc(region, bc)
    k = cluster_count(config, region, bc)
    o = int(config.sum())
    if params.homogeneous:
        return params.p ** o * (1.0 - params.p) ** (region.n_edges - o) * float(params.q) ** k
    factors = params.edge_factors(region.n_edges)
    return math.prod(factors[config].tolist()) * float(params.q) ** k


def partition_function(region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> float:
    return engine(region, _bc(region, bc)).partition_function(params)


def probability(event: Event, region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> float:
    en = engine(region, _bc(region, bc))
    return en.probability(en.indicator(event), params)


def conditional_probability(event: Event, given_edge: int, given_state: int, region: Region,
                            params: RCParams, bc: BoundaryCondition | None = None) -> float:
    en = engine(region, _bc(region, bc))
    if not 0 <= given_edge < region.n_edges:
        raise IndexError(f"edge {given_edge} not in region")
    cond = en.edge_state(given_edge) == bool(given_state)
    den = en.total(params, cond)
    if den <= 0:
        raise ZeroDivisionError(f"conditioning on a null event: edge {given_edge} = {given_state}")
    return en.total(params, cond & en.indicator(event)) / den


def _require_increasing(event: Event) -> None:
    if not event.increasing:
        raise NotMonotoneError(f"{event.name} must be an increasing event (tag: {event.monotone})")


def influence(event: Event, region: Region, params: RCParams, bc: BoundaryCondition | None = None):
    """Edge maximising ``phi(A | e open) - phi(A | e closed)`` and that maximum."""
    _require_increasing(event)
    best_edge, best = -1, -math.inf
    for e in range(region.n_edges):
        gap = (conditional_probability(event, e, 1, region, params, bc)
               - conditional_probability(event, e, 0, region, params, bc))
        if gap > best + 1e-15:
            best_edge, best = e, gap
    return best_edge, max(best, 0.0)


def derivative_dp(event: Event, region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> float:
    """``d/dp phi_p(A)`` as the covariance of ``1_A`` with the open-edge count."""
    if not params.homogeneous:
        raise ValueError("derivative_dp needs the homogeneous mode")
    p = params.p
    if p <= 0.0 or p >= 1.0:
        raise ValueError("derivative formula is singular at p in {0, 1}")
    en = engine(region, _bc(region, bc))
    mask = en.indicator(event)
    z = en.total(params)
    pa = en.total(params, mask) / z
    eo = en.total(params, en.n_open) / z
    eao = en.total(params, mask * en.n_open) / z
    return (eao - pa * eo) / (p * (1.0 - p))


def hamming_expectation(event: Event, region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> float:
    """Expected Hamming distance to an increasing event."""
    _require_increasing(event)
    en = engine(region, _bc(region, bc))
    dist = en.hamming(event)
    if (dist < 0).all():
        raise ValueError(f"event {event.name} is empty")
    if (dist < 0).any():  # pragma: no cover - impossible for satisfiable increasing events
        raise ValueError("some configurations cannot reach the event")
    return en.expectation(dist, params)


def same_spin(x: int, y: int):
    """Spin event ``sigma_x == sigma_y`` for :func:`potts_probability`."""
    return lambda colors: colors[:, x] == colors[:, y]


def potts_probability(spin_event, region: Region, q: int, beta: float, J=None) -> float:
    """Potts probability of ``spin_event`` by enumerating all colourings.

    ``spin_event`` maps an int array of colourings, shape (B, V), to a
    boolean array of length B.
    """
    if int(q) != q or q < 2:
        raise ValueError("Potts model needs an integer q >= 2")
    q = int(q)
    n, m = region.n_vertices, region.n_edges
    if q ** n > POTTS_CAP:
        raise CapacityError(f"{q}^{n} colourings exceeds the cap of {POTTS_CAP}")
    J = np.ones(m) if J is None else np.asarray(J, dtype=float)
    if len(J) != m:
        raise ValueError(f"need {m} couplings")
    u, v = region.edges[:, 0], region.edges[:, 1]
    total = q ** n
    num, den = [], []
    powers = q ** np.arange(n, dtype=np.int64)
    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(start + BLOCK, total), dtype=np.int64)
        colors = (idx[:, None] // powers) % q
        agree = colors[:, u] == colors[:, v]
        w = np.exp(beta * (agree * J).sum(axis=1))
        hit = np.asarray(spin_event(colors), dtype=bool)
        num.append(math.fsum(w[hit].tolist()))
        den.append(math.fsum(w.tolist()))
    return math.fsum(num) / math.fsum(den)


def potts_pair_matrix(region: Region, q: int, beta: float, J=None) -> np.ndarray:
    """``mu(sigma_x == sigma_y)`` for all vertex pairs in one pass over colourings."""
    if int(q) != q or q < 2:
        raise ValueError("Potts model needs an integer q >= 2")
    q = int(q)
    n, m = region.n_vertices, region.n_edges
    if q ** n > POTTS_CAP:
        raise CapacityError(f"{q}^{n} colourings exceeds the cap of {POTTS_CAP}")
    J = np.ones(m) if J is None else np.asarray(J, dtype=float)
    if len(J) != m:
        raise ValueError(f"need {m} couplings")
    u, v = region.edges[:, 0], region.edges[:, 1]
    powers = q ** np.arange(n, dtype=np.int64)
    num = [[[] for _ in range(n)] for _ in range(n)]
    den = []
    for start in range(0, q ** n, BLOCK):
        idx = np.arange(start, min(start + BLOCK, q ** n), dtype=np.int64)
        colors = (idx[:, None] // powers) % q
        w = np.exp(beta * ((colors[:, u] == colors[:, v]) * J).sum(axis=1))
        den.append(math.fsum(w.tolist()))
        for x in range(n):
            for y in range(x + 1, n):
                num[x][y].append(math.fsum(w[colors[:, x] == colors[:, y]].tolist()))
    z = math.fsum(den)
    out = np.eye(n)
    for x in range(n):
        for y in range(x + 1, n):
            out[x, y] = out[y, x] = math.fsum(num[x][y]) / z
    return out


def connection_matrix(region: Region, params: RCParams, bc: BoundaryCondition | None = None) -> np.ndarray:
    """``phi(x <-> y)`` for all vertex pairs (open paths, no boundary wiring)."""
    en = engine(region, _bc(region, bc))
    n = region.n_vertices
    z = en.total(params)
    out = np.eye(n)
    parts = [en.labels(a, b) for a, b in en.bounds]
    labels = np.concatenate(parts)
    for x in range(n):
        for y in range(x + 1, n):
            out[x, y] = out[y, x] = en.total(params, labels[:, x] == labels[:, y]) / z
    return out
