"""Cluster and crossing analytics on edge configurations.

A configuration is a boolean numpy vector indexed like ``region.edges``.
The hot loops (union-find, 0-1 BFS) are compiled with numba.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numba
import numpy as np

from .lattice import DualMap, Region


class Unreachable(enum.Enum):
    """Hamming distance to an event that no opening of edges can reach."""

    INFINITE = "inf"

    def __repr__(self):
        return "Unreachable.INFINITE"


INFINITE = Unreachable.INFINITE

_DIRECTIONS = {
    "horizontal": ("left", "right"),
    "h": ("left", "right"),
    "vertical": ("bottom", "top"),
    "v": ("bottom", "top"),
}


def as_config(config, n_edges: int) -> np.ndarray:
    """Validate a configuration and return it as a boolean array."""
    arr = np.asarray(config)
    if arr.ndim != 1 or len(arr) != n_edges:
        raise ValueError(f"configuration has length {arr.size}, region has {n_edges} edges")
    return arr.astype(bool, copy=False)


def side_pair(region: Region, direction: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        a, b = _DIRECTIONS[direction]
    except KeyError:
        raise ValueError(f"direction must be 'horizontal' or 'vertical', got {direction!r}") from None
    sa, sb = region.side(a), region.side(b)
    if not sa or not sb:
        raise ValueError(f"region {region.name!r} has an empty {a if not sa else b} side")
    return np.array(sorted(sa), dtype=np.int64), np.array(sorted(sb), dtype=np.int64)


@numba.njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@numba.njit(cache=True)
def _union(parent, rank, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return False
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return True


@numba.njit(cache=True)
def _union_find(n, edges, is_open, wiring):
    """Union over open edges and then over wiring pairs; parents fully compressed."""
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    for k in range(edges.shape[0]):
        if is_open[k]:
            _union(parent, rank, edges[k, 0], edges[k, 1])
    for k in range(wiring.shape[0]):
        _union(parent, rank, wiring[k, 0], wiring[k, 1])
    for i in range(n):
        _find(parent, i)
    return parent, rank


@numba.njit(cache=True)
def _sides_connected(n, edges, is_open, side_a, side_b):
    parent = np.arange(n + 2)
    rank = np.zeros(n + 2, dtype=np.int64)
    for v in side_a:
        _union(parent, rank, n, v)
    for v in side_b:
        _union(parent, rank, n + 1, v)
    for k in range(edges.shape[0]):
        if is_open[k]:
            _union(parent, rank, edges[k, 0], edges[k, 1])
            if _find(parent, n) == _find(parent, n + 1):
                return True
    return _find(parent, n) == _find(parent, n + 1)


@numba.njit(cache=True)
def _zero_one_bfs(n, indptr, nbr, nbr_edge, is_open, side_a, side_b):
    """Minimal number of closed edges on a path from side_a to side_b; -1 if none."""
    big = np.iinfo(np.int64).max
    dist = np.full(n, big, dtype=np.int64)
    target = np.zeros(n, dtype=np.bool_)
    for v in side_b:
        target[v] = True
    cap = 2 * (n + nbr.shape[0]) + 4
    buf = np.empty(cap, dtype=np.int64)
    head = cap // 2
    tail = head
    for v in side_a:
        if dist[v] != 0:
            dist[v] = 0
            buf[tail] = v
            tail += 1
    done = np.zeros(n, dtype=np.bool_)
    while head < tail:
        u = buf[head]
        head += 1
        if done[u]:
            continue
        done[u] = True
        if target[u]:
            return dist[u]
        for t in range(indptr[u], indptr[u + 1]):
            w = nbr[t]
            cost = 0 if is_open[nbr_edge[t]] else 1
            nd = dist[u] + cost
            if nd < dist[w]:
                dist[w] = nd
                if cost == 0:
                    head -= 1
                    buf[head] = w
                else:
                    buf[tail] = w
                    tail += 1
    return -1


def adjacency(region: Region):
    """CSR adjacency ``(indptr, neighbour, edge_id)`` of a region."""
    n, edges = region.n_vertices, region.edges
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(len(edges)), np.arange(len(edges))])
    order = np.lexsort((dst, src))
    src, dst, eid = src[order], dst[order], eid[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst.astype(np.int64), eid.astype(np.int64)


def wiring_pairs(blocks) -> np.ndarray:
    """Star pairs joining every member of a block to the block's first member."""
    pairs = [(b[0], v) for b in blocks for v in b[1:]]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


@dataclass
class ClusterPartition:
    parent: np.ndarray
    rank: np.ndarray
    count: int
    labels: np.ndarray
    sizes: np.ndarray
    bboxes: np.ndarray

    def root(self, v: int) -> int:
        return int(self.parent[v])

    def members(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[v])


def labels_of(config, region: Region, wiring: np.ndarray | None = None) -> np.ndarray:
    """Compact cluster labels ``0..k-1`` (numbered by smallest vertex)."""
    config = as_config(config, region.n_edges)
    if wiring is None:
        wiring = np.zeros((0, 2), dtype=np.int64)
    parent, _ = _union_find(region.n_vertices, region.edges, config, wiring)
    _, labels = np.unique(parent, return_inverse=True)
    return labels


def clusters(config, region: Region, bc=None) -> ClusterPartition:
    """Open clusters of ``config``, with boundary blocks wired when ``bc`` is given."""
    config = as_config(config, region.n_edges)
    wiring = wiring_pairs(bc.blocks) if bc is not None else np.zeros((0, 2), dtype=np.int64)
    parent, rank = _union_find(region.n_vertices, region.edges, config, wiring)
    roots, labels = np.unique(parent, return_inverse=True)
    k = len(roots)
    sizes = np.bincount(labels, minlength=k)
    xy = region.vertices
    bboxes = np.empty((k, 4))
    bboxes[:, 0] = np.inf
    bboxes[:, 1] = -np.inf
    bboxes[:, 2] = np.inf
    bboxes[:, 3] = -np.inf
    np.minimum.at(bboxes[:, 0], labels, xy[:, 0])
    np.maximum.at(bboxes[:, 1], labels, xy[:, 0])
    np.minimum.at(bboxes[:, 2], labels, xy[:, 1])
    np.maximum.at(bboxes[:, 3], labels, xy[:, 1])
    return ClusterPartition(parent=parent, rank=rank, count=k, labels=labels, sizes=sizes, bboxes=bboxes)


def crossing(config, region: Region, direction: str) -> bool:
    """Open path between the left/right (horizontal) or bottom/top (vertical) sides."""
    config = as_config(config, region.n_edges)
    a, b = side_pair(region, direction)
    return bool(_sides_connected(region.n_vertices, region.edges, config, a, b))


def dual_config(config, dualmap: DualMap, inverse: bool = False) -> np.ndarray:
    """``w*(e*) = 1 - w(e)``; with ``inverse=True`` maps a dual configuration back."""
    pairs = dualmap.edge_pairs
    config = as_config(config, len(pairs))
    out = np.empty(len(pairs), dtype=bool)
    if inverse:
        out[:] = ~config[pairs]
    else:
        out[pairs] = ~config
    return out


def dual_crossing(dual_cfg, dualmap: DualMap, direction: str) -> bool:
    """Dual-open crossing between outer-face arcs.

    Vertical: from the north arc to the south arc.  Horizontal: west to east.
    The outer vertex is split into its arcs; dual edges incident to it join
    their bounded face to the arc terminal they leave through.
    """
    arc_a, arc_b = {"vertical": ("north", "south"), "v": ("north", "south"),
                    "horizontal": ("west", "east"), "h": ("west", "east")}[direction]
    dual = dualmap.dual_region
    dual_cfg = as_config(dual_cfg, dual.n_edges)
    n = dual.n_vertices
    ta, tb = n, n + 1
    parent = list(range(n + 2))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k, (u, v) in enumerate(dual.edges):
        if not dual_cfg[k]:
            continue
        u, v = int(u), int(v)
        if dualmap.outer in (u, v):
            inner = v if u == dualmap.outer else u
            arc = dualmap.arcs[dualmap.inverse_pairs[k]]
            if arc == arc_a:
                parent[find(inner)] = find(ta)
            elif arc == arc_b:
                parent[find(inner)] = find(tb)
            continue
        parent[find(u)] = find(v)
    return find(ta) == find(tb)


def hamming_to_crossing(config, region: Region, direction: str, csr=None):
    """Fewest closed edges whose opening creates the crossing.

    Returns ``INFINITE`` when the sides are disconnected even in the
    all-open configuration.
    """
    config = as_config(config, region.n_edges)
    a, b = side_pair(region, direction)
    indptr, nbr, eid = csr if csr is not None else adjacency(region)
    d = _zero_one_bfs(region.n_vertices, indptr, nbr, eid, config, a, b)
    return INFINITE if d < 0 else int(d)


def count_separated_crossings(config, region: Region, direction: str) -> int:
    """Number of distinct clusters of the region that contain a crossing."""
    a, b = side_pair(region, direction)
    labels = labels_of(config, region)
    return len(set(labels[a].tolist()) & set(labels[b].tolist()))


def cluster_stats(config, region: Region, origin: int):
    """Size, Chebyshev radius and touched sides of the cluster of ``origin``.

    The radius is floored to an integer, so ``radius >= n`` is exactly the
    event that the cluster reaches the boundary of the box of half-width
    ``n`` around the origin.
    """
    if not 0 <= origin < region.n_vertices:
        raise IndexError(f"origin {origin} not in region")
    labels = labels_of(config, region)
    members = np.flatnonzero(labels == labels[origin])
    delta = np.abs(region.vertices[members] - region.vertices[origin])
    radius = int(np.floor(delta.max() + 1e-9))
    touches = {s for s in ("left", "right", "bottom", "top") if region.side(s) & set(members.tolist())}
    return len(members), radius, touches


def dfs_components(config, region: Region) -> list[set]:
    """Plain DFS clusters; an independent oracle for the union-find paths."""
    config = as_config(config, region.n_edges)
    adj = [[] for _ in range(region.n_vertices)]
    for k, (u, v) in enumerate(region.edges):
        if config[k]:
            adj[u].append(int(v))
            adj[v].append(int(u))
    seen = [False] * region.n_vertices
    comps = []
    for s in range(region.n_vertices):
        if seen[s]:
            continue
        comp, stack = set(), [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.add(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(comp)
    return comps


def hypercube_distance(in_event: np.ndarray) -> np.ndarray:
    """Hamming distance of every configuration index to a set of indices.

    ``in_event`` is a boolean array of length ``2**m``; bit ``k`` of an
    index is the state of edge ``k``.  Multi-source BFS on the hypercube,
    with ``-1`` for configurations that cannot reach the event.
    """
    size = len(in_event)
    m = size.bit_length() - 1
    if 1 << m != size:
        raise ValueError("event table length must be a power of two")
    dist = np.where(in_event, 0, -1).astype(np.int64)
    idx = np.arange(size)
    frontier = in_event.copy()
    level = 0
    while frontier.any():
        level += 1
        reached = np.zeros(size, dtype=bool)
        for k in range(m):
            reached |= frontier[idx ^ (1 << k)]
        new = reached & (dist < 0)
        dist[new] = level
        frontier = new
    return dist


def bfs_hamming(config, in_event) -> int:
    """Single-configuration hypercube BFS, used as an oracle in tests."""
    config = np.asarray(config, dtype=bool)
    start = tuple(config.tolist())
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        state, d = queue.popleft()
        if in_event(np.array(state)):
            return d
        for k in range(len(state)):
            nxt = list(state)
            nxt[k] = not nxt[k]
            nxt = tuple(nxt)
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, d + 1))
    return -1
