"""Monte Carlo samplers for the random-cluster model.

* single-edge heat-bath (Glauber) dynamics, any q > 0 and any boundary
  condition;
* the Edwards-Sokal cluster chain (colour clusters, then re-open edges
  between equal colours) for integer q >= 2 with free boundary;
* the continuous-time two-configuration chain coupling the measures
  conditioned on a pivot edge being closed and open.

Randomness comes from numpy's counter-based Philox generator.  Replica ``r``
of a run seeded with ``s`` uses the stream ``SeedSequence(s, spawn_key=(r,))``
so parallel and serial runs see identical numbers.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numba
import numpy as np

from . import connectivity as conn
from .events import Event
from .exact import BoundaryCondition, RCParams, _bc
from .lattice import Region

DEFAULT_BURN_IN = 1000
FRAME_MAGIC = b"RCTJ"


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else make_rng(int(seed))


# ---------------------------------------------------------------------------
# graph plumbing shared by the kernels


@dataclass(frozen=True, eq=False)
class WiredGraph:
    """Region adjacency with one always-open hub per wired boundary block.

    Hub edges get ids ``>= n_edges`` so kernels can treat them as open.
    """

    n_nodes: int
    n_edges: int
    indptr: np.ndarray
    nbr: np.ndarray
    eid: np.ndarray
    edges: np.ndarray

    @classmethod
    def build(cls, region: Region, bc: BoundaryCondition | None) -> "WiredGraph":
        edges = [tuple(e) for e in region.edges.tolist()]
        n = region.n_vertices
        if bc is not None:
            for block in bc.blocks:
                if len(block) > 1:
                    for v in block:
                        edges.append((v, n))
                    n += 1
        arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        src = np.concatenate([arr[:, 0], arr[:, 1]])
        dst = np.concatenate([arr[:, 1], arr[:, 0]])
        eid = np.concatenate([np.arange(len(arr)), np.arange(len(arr))])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return cls(n, region.n_edges, np.cumsum(indptr), dst[order].astype(np.int64),
                   eid[order].astype(np.int64), region.edges.astype(np.int64))


@numba.njit(cache=True)
def _linked(g_indptr, g_nbr, g_eid, m, is_open, a, b, skip, mark, stamp, stack):
    """Are a and b joined by open edges (hub edges count as open), ignoring ``skip``?"""
    if a == b:
        return True
    top = 0
    stack[top] = a
    top += 1
    mark[a] = stamp
    while top > 0:
        top -= 1
        u = stack[top]
        for t in range(g_indptr[u], g_indptr[u + 1]):
            e = g_eid[t]
            if e == skip:
                continue
            if e < m and not is_open[e]:
                continue
            w = g_nbr[t]
            if mark[w] == stamp:
                continue
            if w == b:
                return True
            mark[w] = stamp
            stack[top] = w
            top += 1
    return False


@numba.njit(cache=True)
def _heat_bath_kernel(config, edges, g_indptr, g_nbr, g_eid, n_nodes, probs, q, order, uniforms,
                      record):
    """Run ``order.shape[0]`` sweeps in place; optionally record bit codes."""
    m = edges.shape[0]
    mark = np.zeros(n_nodes, dtype=np.int64)
    stack = np.empty(n_nodes, dtype=np.int64)
    stamp = 0
    codes = np.empty(order.shape[0] if record else 0, dtype=np.int64)
    for s in range(order.shape[0]):
        for t in range(m):
            e = order[s, t]
            p = probs[e]
            if q == 1.0:
                thresh = p
            else:
                stamp += 1
                if _linked(g_indptr, g_nbr, g_eid, m, config, edges[e, 0], edges[e, 1], e, mark, stamp, stack):
                    thresh = p
                else:
                    thresh = p / (p + q * (1.0 - p))
            config[e] = uniforms[s, t] < thresh
        if record:
            code = 0
            for e in range(m):
                if config[e]:
                    code |= 1 << e
            codes[s] = code
    return codes


def open_probability(config, region: Region, edge: int, params: RCParams,
                     bc: BoundaryCondition | None = None, graph: WiredGraph | None = None) -> float:
    """Conditional probability that ``edge`` is open given all other edges."""
    config = conn.as_config(config, region.n_edges)
    graph = graph or WiredGraph.build(region, _bc(region, bc))
    p = float(params.edge_probs(region.n_edges)[edge])
    if params.q == 1:
        return p
    mark = np.zeros(graph.n_nodes, dtype=np.int64)
    stack = np.empty(graph.n_nodes, dtype=np.int64)
    u, v = (int(x) for x in region.edges[edge])
    if _linked(graph.indptr, graph.nbr, graph.eid, graph.n_edges, config, u, v, edge, mark, 1, stack):
        return p
    return p / (p + params.q * (1.0 - p))


# ---------------------------------------------------------------------------
# single chains


@dataclass
class ChainState:
    config: np.ndarray
    region: Region
    bc: BoundaryCondition
    params: RCParams
    rng: np.random.Generator
    sweep_count: int = 0
    graph: WiredGraph | None = field(default=None, repr=False)

    def __post_init__(self):
        self.config = conn.as_config(self.config, self.region.n_edges).copy()
        if self.graph is None:
            self.graph = WiredGraph.build(self.region, self.bc)

    @classmethod
    def start(cls, region: Region, params: RCParams, bc=None, seed=0, config=None) -> "ChainState":
        config = np.zeros(region.n_edges, dtype=bool) if config is None else config
        return cls(config, region, _bc(region, bc), params, _rng(seed))

    def sweep(self, n: int = 1, record: bool = False) -> np.ndarray:
        """Heat-bath sweeps, each over a fresh random permutation of the edges."""
        m = self.region.n_edges
        probs = self.params.edge_probs(m).astype(np.float64)
        codes = []
        done = 0
        while done < n:
            chunk = min(n - done, max(1, (1 << 20) // max(m, 1)))
            order = np.argsort(self.rng.random((chunk, m)), axis=1)
            uniforms = self.rng.random((chunk, m))
            g = self.graph
            c = _heat_bath_kernel(self.config, g.edges, g.indptr, g.nbr, g.eid, g.n_nodes, probs,
                                  float(self.params.q), order, uniforms, record and m < 63)
            codes.append(c)
            done += chunk
        self.sweep_count += n
        return np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)


def heat_bath_step(state: ChainState, edge: int, u: float) -> ChainState:
    """Resample one edge from its conditional law using the uniform ``u``."""
    if not 0 <= edge < state.region.n_edges:
        raise IndexError(f"edge {edge} not in region")
    thresh = open_probability(state.config, state.region, edge, state.params, state.bc, state.graph)
    config = state.config.copy()
    config[edge] = u < thresh
    return replace(state, config=config)


def glauber_run(region: Region, params: RCParams, bc=None, sweeps: int = 0, seed=0,
                config=None) -> ChainState:
    """Heat-bath chain started from ``config`` (all closed by default)."""
    state = ChainState.start(region, params, bc, seed, config)
    if sweeps:
        state.sweep(sweeps)
    return state


# ---------------------------------------------------------------------------
# Edwards-Sokal


def es_color(config, region: Region, q: int, seed) -> np.ndarray:
    """Give every open cluster an independent uniform colour in ``1..q``."""
    if int(q) != q or q < 2:
        raise ValueError("Edwards-Sokal colouring needs an integer q >= 2")
    labels = conn.labels_of(config, region)
    rng = _rng(seed)
    palette = rng.integers(1, int(q) + 1, size=int(labels.max()) + 1)
    return palette[labels]


def es_bond(spins, region: Region, params: RCParams, seed) -> np.ndarray:
    """Open each edge with equal end colours with its edge probability."""
    spins = np.asarray(spins)
    if len(spins) != region.n_vertices:
        raise ValueError("spin configuration does not match region")
    if spins.min() < 1 or spins.max() > int(params.q):
        raise ValueError("spin out of range 1..q")
    rng = _rng(seed)
    probs = params.edge_probs(region.n_edges)
    same = spins[region.edges[:, 0]] == spins[region.edges[:, 1]]
    return same & (rng.random(region.n_edges) < probs)


@numba.njit(cache=True)
def _es_kernel(config, edges, n, probs, colours, uniforms, record):
    """Edwards-Sokal sweeps with pre-drawn randomness.

    Sweep ``s`` colours the cluster rooted at ``r`` with ``colours[s, r]``
    and opens an edge with equal end colours when ``uniforms[s, e] < probs[e]``.
    """
    m = edges.shape[0]
    sweeps = colours.shape[0]
    codes = np.zeros(sweeps if record else 0, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    spin = np.empty(n, dtype=np.int64)
    for s in range(sweeps):
        for v in range(n):
            parent[v] = v
        for e in range(m):
            if config[e]:
                a, b = edges[e, 0], edges[e, 1]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a != b:
                    parent[a] = b
        for v in range(n):
            r = v
            while parent[r] != r:
                r = parent[r]
            spin[v] = colours[s, r]
        code = 0
        for e in range(m):
            config[e] = spin[edges[e, 0]] == spin[edges[e, 1]] and uniforms[s, e] < probs[e]
            if record and config[e]:
                code |= 1 << e
        if record:
            codes[s] = code
    return codes


class ESChain:
    """Alternating :func:`es_color` / :func:`es_bond` updates (free boundary)."""

    def __init__(self, region: Region, params: RCParams, seed=0, config=None):
        if int(params.q) != params.q or params.q < 2:
            raise ValueError("Edwards-Sokal chain needs an integer q >= 2")
        self.region, self.params, self.rng = region, params, _rng(seed)
        self.config = np.zeros(region.n_edges, dtype=bool) if config is None else conn.as_config(config, region.n_edges).copy()
        self.sweep_count = 0

    def sweep(self, n: int = 1, record: bool = False) -> np.ndarray:
        """ES sweeps; returns edge-bit codes per sweep when ``record`` and fewer than 63 edges."""
        m, nv = self.region.n_edges, self.region.n_vertices
        probs = self.params.edge_probs(m).astype(np.float64)
        edges = np.ascontiguousarray(self.region.edges, dtype=np.int64)
        codes = []
        done = 0
        while done < n:
            chunk = min(n - done, max(1, (1 << 20) // max(m + nv, 1)))
            colours = self.rng.integers(1, int(self.params.q) + 1, size=(chunk, nv))
            uniforms = self.rng.random((chunk, m))
            codes.append(_es_kernel(self.config, edges, nv, probs, colours, uniforms, record and m < 63))
            done += chunk
        self.sweep_count += n
        return np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)


def make_chain(region: Region, params: RCParams, bc=None, seed=0, algo: str = "auto"):
    """Heat-bath or Edwards-Sokal chain; ``auto`` picks ES for integer q >= 2 with free boundary."""
    bc = _bc(region, bc)
    free = bc.label() == "free"
    integer_q = params.q >= 2 and int(params.q) == params.q
    if algo == "auto":
        algo = "es" if integer_q and free else "heatbath"
    if algo == "es":
        if not free:
            raise ValueError("the Edwards-Sokal chain colours free clusters; use heatbath for other boundaries")
        return ESChain(region, params, seed)
    if algo == "heatbath":
        return ChainState.start(region, params, bc, seed)
    raise ValueError(f"unknown algorithm {algo!r}")


def fast_checker(event: Event, region: Region):
    """``config -> bool`` using the compiled crossing test where possible."""
    event.validate(region)
    if event.op == "crossing":
        a, b = conn.side_pair(region, event.args[0])
        return lambda c: bool(conn._sides_connected(region.n_vertices, region.edges, c, a, b))
    if event.op == "true":
        return lambda c: True
    if event.op == "edge":
        e = event.args[0]
        return lambda c: bool(c[e])
    return lambda c: event.holds(c, region)


def estimate_many(events, region: Region, params: RCParams, bc=None, replicas: int = 8,
                  sweeps: int = 1000, burn_in: int = DEFAULT_BURN_IN, seed=0, algo: str = "auto"):
    """Like :func:`estimate` for several events scored on the same chains."""
    if replicas < 2:
        raise ValueError("need at least two replicas for a standard error")
    if sweeps < 1:
        raise ValueError("need at least one measurement sweep")
    checks = [fast_checker(ev, region) for ev in events]
    means = np.empty((replicas, len(checks)))
    for r in range(replicas):
        chain = make_chain(region, params, bc, make_rng(seed, r), algo)
        if burn_in:
            chain.sweep(burn_in)
        hits = np.zeros(len(checks))
        for _ in range(sweeps):
            chain.sweep(1)
            for k, check in enumerate(checks):
                hits[k] += check(chain.config)
        means[r] = hits / sweeps
    mean = means.mean(axis=0)
    se = means.std(axis=0, ddof=1) / math.sqrt(replicas)
    return [(float(a), float(b)) for a, b in zip(mean, se)]


def estimate(event: Event, region: Region, params: RCParams, bc=None, replicas: int = 8,
             sweeps: int = 1000, burn_in: int = DEFAULT_BURN_IN, seed=0, algo: str = "auto"):
    """Mean of the event indicator with a replica-level standard error.

    Replica ``r`` runs its own chain from the all-closed configuration,
    discards ``burn_in`` sweeps and scores the event after each of the next
    ``sweeps`` sweeps.
    """
    return estimate_many([event], region, params, bc, replicas, sweeps, burn_in, seed, algo)[0]


# ---------------------------------------------------------------------------
# one-arm probabilities


@numba.njit(cache=True)
def _explore_radii(indptr, nbr, xs, ys, origin, p, n_samples, seed):
    """Exact Bernoulli(p) sampling of the origin cluster by lazy exploration."""
    np.random.seed(seed)
    n = xs.shape[0]
    mark = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    out = np.empty(n_samples, dtype=np.float64)
    x0, y0 = xs[origin], ys[origin]
    for s in range(n_samples):
        stamp = s + 1
        top = 0
        stack[0] = origin
        top = 1
        mark[origin] = stamp
        r = 0.0
        while top > 0:
            top -= 1
            u = stack[top]
            d = max(abs(xs[u] - x0), abs(ys[u] - y0))
            if d > r:
                r = d
            for t in range(indptr[u], indptr[u + 1]):
                w = nbr[t]
                if mark[w] == stamp:
                    continue
                # each edge is revealed at most once: it is only examined from
                # its first explored endpoint while the other is unexplored
                if np.random.random() < p:
                    mark[w] = stamp
                    stack[top] = w
                    top += 1
        out[s] = r
    return out


def origin_radii_bernoulli(region: Region, p: float, origin: int, samples: int, seed) -> np.ndarray:
    """Chebyshev radius of the origin cluster in independent Bernoulli samples.

    Radii are floored like :func:`connectivity.cluster_stats`.
    """
    indptr, nbr, _ = conn.adjacency(region)
    s = int(_rng(seed).integers(0, 2**31 - 1))
    r = _explore_radii(indptr, nbr, region.vertices[:, 0].copy(), region.vertices[:, 1].copy(),
                       int(origin), float(p), int(samples), s)
    return np.floor(r + 1e-9).astype(np.int64)


def origin_radii(config, region: Region, origins: np.ndarray) -> np.ndarray:
    """Floored Chebyshev radius of the cluster of every vertex in ``origins``."""
    part = conn.clusters(config, region)
    box = part.bboxes[part.labels[origins]]
    xy = region.vertices[origins]
    r = np.maximum.reduce([xy[:, 0] - box[:, 0], box[:, 1] - xy[:, 0], xy[:, 1] - box[:, 2], box[:, 3] - xy[:, 1]])
    return np.floor(r + 1e-9).astype(np.int64)


def one_arm_hits(region: Region, params: RCParams, ns, origins, samples: int, seed=0, bc=None,
                 burn_in: int = DEFAULT_BURN_IN, replicas: int = 8, algo: str = "auto"):
    """Counts of ``radius >= n`` per replica, origin and ``n``.

    Returns ``(hits, trials)`` with ``hits`` of shape
    ``(replicas, len(origins), len(ns))`` and ``trials`` the number of
    samples per replica and origin.  At q = 1 clusters are sampled exactly
    by exploration from each origin; otherwise each replica runs a chain for
    ``samples // replicas`` sweeps after burn-in and scores every origin on
    every sweep.
    """
    ns = np.asarray(ns)
    origins = np.atleast_1d(np.asarray(origins, dtype=np.int64))
    per = max(1, samples // replicas)
    hits = np.zeros((replicas, len(origins), len(ns)))
    for r in range(replicas):
        rng = make_rng(seed, r)
        if params.q == 1 and params.homogeneous and _bc(region, bc).label() == "free":
            for i, o in enumerate(origins):
                radii = origin_radii_bernoulli(region, params.p, int(o), per, rng)
                hits[r, i] = (radii[:, None] >= ns[None, :]).sum(axis=0)
        else:
            chain = make_chain(region, params, bc, rng, algo)
            if burn_in:
                chain.sweep(burn_in)
            for _ in range(per):
                chain.sweep(1)
                radii = origin_radii(chain.config, region, origins)
                hits[r] += radii[:, None] >= ns[None, :]
    return hits, per


def one_arm(region: Region, params: RCParams, ns, origins, samples: int, seed=0, bc=None,
            burn_in: int = DEFAULT_BURN_IN, replicas: int = 8, algo: str = "auto"):
    """Estimate ``phi(x <-> boundary of the box of half-width n around x)``.

    Pools the ``origins`` (translates) and all samples.  Returns
    ``(estimates, stderrs, hits, trials)`` aligned with ``ns``; the standard
    error comes from the spread of per-replica means.
    """
    hits, per = one_arm_hits(region, params, ns, origins, samples, seed, bc, burn_in, replicas, algo)
    pooled = hits.sum(axis=1)
    n_orig = hits.shape[1]
    rep_means = pooled / (per * n_orig)
    est = pooled.sum(axis=0) / (per * n_orig * replicas)
    se = rep_means.std(axis=0, ddof=1) / math.sqrt(replicas)
    return est, se, pooled.sum(axis=0), per * n_orig * replicas


# ---------------------------------------------------------------------------
# two-configuration coupling


@numba.njit(cache=True)
def _in_pivot_cluster(g_indptr, g_nbr, g_eid, m, is_open, a, b, mark, stamp, stack):
    """Mark every node reachable from a or b through open (or hub) edges."""
    top = 0
    for s in (a, b):
        if mark[s] != stamp:
            mark[s] = stamp
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for t in range(g_indptr[u], g_indptr[u + 1]):
            e = g_eid[t]
            if e < m and not is_open[e]:
                continue
            w = g_nbr[t]
            if mark[w] != stamp:
                mark[w] = stamp
                stack[top] = w
                top += 1


@numba.njit(cache=True)
def _coupling_kernel(edges, g_indptr, g_nbr, g_eid, n_nodes, probs, q, pivot, pi, omega,
                     t_max, max_events, seed, occ_pi, occ_omega, track, keep):
    np.random.seed(seed)
    m = edges.shape[0]
    mark = np.zeros(n_nodes, dtype=np.int64)
    stack = np.empty(n_nodes + 2, dtype=np.int64)
    stamp = 0
    rates = np.zeros(3 * m)
    clock = 0.0
    n_events = 0
    bad_order = 0
    bad_pivot = 0
    bad_outside = 0
    out_t = np.empty(keep)
    out_pi = np.empty(keep, dtype=np.int64)
    out_om = np.empty(keep, dtype=np.int64)
    n_kept = 0
    while True:
        total = 0.0
        for f in range(m):
            rates[3 * f] = 0.0
            rates[3 * f + 1] = 0.0
            rates[3 * f + 2] = 0.0
            if f == pivot:
                continue
            ratio = (1.0 - probs[f]) / probs[f]
            u = edges[f, 0]
            v = edges[f, 1]
            if not pi[f]:
                rates[3 * f] = 1.0  # open f in both
            if omega[f]:
                stamp += 1
                d_om = 0 if _linked(g_indptr, g_nbr, g_eid, m, omega, u, v, f, mark, stamp, stack) else 1
                q_om = q if d_om else 1.0
                rates[3 * f + 1] = ratio * q_om  # close f in both
                if pi[f]:
                    stamp += 1
                    d_pi = 0 if _linked(g_indptr, g_nbr, g_eid, m, pi, u, v, f, mark, stamp, stack) else 1
                    q_pi = q if d_pi else 1.0
                    extra = ratio * (q_pi - q_om)
                    if extra < -1e-12:
                        raise ValueError("negative rate: D_f(pi) < D_f(omega)")
                    rates[3 * f + 2] = max(extra, 0.0)  # close f in pi only
            total += rates[3 * f] + rates[3 * f + 1] + rates[3 * f + 2]
        if total <= 0.0:
            break
        dt = -math.log(1.0 - np.random.random()) / total
        if clock + dt > t_max or n_events >= max_events:
            dt = t_max - clock if clock + dt > t_max else dt
            if track:
                cp = 0
                co = 0
                for f in range(m):
                    if pi[f]:
                        cp |= 1 << f
                    if omega[f]:
                        co |= 1 << f
                occ_pi[cp] += dt
                occ_omega[co] += dt
            clock += dt
            break
        if track:
            cp = 0
            co = 0
            for f in range(m):
                if pi[f]:
                    cp |= 1 << f
                if omega[f]:
                    co |= 1 << f
            occ_pi[cp] += dt
            occ_omega[co] += dt
        clock += dt
        target = np.random.random() * total
        acc = 0.0
        choice = -1
        for k in range(3 * m):
            acc += rates[k]
            if rates[k] > 0.0 and target < acc:
                choice = k
                break
        if choice < 0:
            for k in range(3 * m - 1, -1, -1):
                if rates[k] > 0.0:
                    choice = k
                    break
        f = choice // 3
        kind = choice % 3
        if kind == 0:
            pi[f] = True
            omega[f] = True
        elif kind == 1:
            pi[f] = False
            omega[f] = False
        else:
            pi[f] = False
        n_events += 1
        # invariant audit
        if pi[pivot] or not omega[pivot]:
            bad_pivot += 1
        for g in range(m):
            if pi[g] and not omega[g]:
                bad_order += 1
                break
        stamp += 1
        _in_pivot_cluster(g_indptr, g_nbr, g_eid, m, omega, edges[pivot, 0], edges[pivot, 1], mark, stamp, stack)
        for g in range(m):
            if pi[g] != omega[g]:
                if mark[edges[g, 0]] != stamp and mark[edges[g, 1]] != stamp:
                    bad_outside += 1
                    break
        if n_kept < keep:
            cp = 0
            co = 0
            for g in range(m):
                if pi[g]:
                    cp |= 1 << g
                if omega[g]:
                    co |= 1 << g
            out_t[n_kept] = clock
            out_pi[n_kept] = cp
            out_om[n_kept] = co
            n_kept += 1
    return clock, n_events, bad_order, bad_pivot, bad_outside, out_t[:n_kept], out_pi[:n_kept], out_om[:n_kept]


@dataclass
class CoupledState:
    pi: np.ndarray
    omega: np.ndarray
    pivot_edge: int
    clock: float


@dataclass
class CouplingRun:
    """Outcome of :func:`coupling_chain_run`.

    ``violations`` counts transitions after which an invariant failed:
    ``order`` (pi <= omega), ``pivot`` (pi(e) = 0, omega(e) = 1) and
    ``outside`` (pi = omega on edges outside the omega-cluster of e).
    ``occupation_pi`` / ``occupation_omega`` hold the time spent in each
    configuration index when the region has at most 20 edges.
    """

    final: CoupledState
    n_events: int
    violations: dict
    times: np.ndarray
    pi_codes: np.ndarray
    omega_codes: np.ndarray
    occupation_pi: np.ndarray | None
    occupation_omega: np.ndarray | None
    m: int

    def states(self):
        bits = np.arange(self.m)
        for t, a, b in zip(self.times, self.pi_codes, self.omega_codes):
            yield CoupledState(((a >> bits) & 1).astype(bool), ((b >> bits) & 1).astype(bool),
                               self.final.pivot_edge, float(t))

    def marginals(self):
        return (self.occupation_pi / self.occupation_pi.sum(),
                self.occupation_omega / self.occupation_omega.sum())


def coupling_chain_run(region: Region, params: RCParams, bc=None, pivot_edge: int = 0,
                       t_max: float = 100.0, seed=0, max_events: int | None = None,
                       keep: int = 10_000, start=None) -> CouplingRun:
    """Simulate the coupled pair ``(pi, omega)`` with pi(e) = 0 and omega(e) = 1.

    For every edge ``f`` other than the pivot: rate 1 opens ``f`` in both;
    rate ``(1-p)/p * q**D_f(omega)`` closes it in both; rate
    ``(1-p)/p * (q**D_f(pi) - q**D_f(omega))`` closes it in ``pi`` alone,
    where ``D_f`` is 1 when the endpoints of ``f`` are not joined off ``f``.
    Gillespie scheduling with all rates recomputed after each transition.
    The first ``keep`` transitions are kept as a trajectory.
    """
    bc = _bc(region, bc)
    m = region.n_edges
    if not 0 <= pivot_edge < m:
        raise IndexError(f"pivot edge {pivot_edge} not in region")
    probs = params.edge_probs(m).astype(np.float64)
    if np.any(probs <= 0) or np.any(probs >= 1):
        raise ValueError("coupling chain needs edge probabilities strictly inside (0, 1)")
    if params.q < 1:
        raise ValueError("coupling chain needs q >= 1")
    graph = WiredGraph.build(region, bc)
    if start is None:
        pi = np.zeros(m, dtype=bool)
        omega = np.zeros(m, dtype=bool)
        omega[pivot_edge] = True
    else:
        pi, omega = (conn.as_config(c, m).copy() for c in start)
    track = m <= 20
    occ_pi = np.zeros(1 << m if track else 1)
    occ_om = np.zeros(1 << m if track else 1)
    s = int(_rng(seed).integers(0, 2**31 - 1))
    clock, n_events, bad_order, bad_pivot, bad_outside, times, pc, oc = _coupling_kernel(
        graph.edges, graph.indptr, graph.nbr, graph.eid, graph.n_nodes, probs, float(params.q),
        int(pivot_edge), pi, omega, float(t_max), np.int64(max_events if max_events is not None else 2**62),
        s, occ_pi, occ_om, track, int(keep),
    )
    return CouplingRun(
        final=CoupledState(pi, omega, int(pivot_edge), float(clock)),
        n_events=int(n_events),
        violations={"order": int(bad_order), "pivot": int(bad_pivot), "outside": int(bad_outside)},
        times=times, pi_codes=pc, omega_codes=oc,
        occupation_pi=occ_pi if track else None,
        occupation_omega=occ_om if track else None,
        m=m,
    )


# ---------------------------------------------------------------------------
# trajectory dumps


def write_frames(path, frames) -> None:
    """Binary dump: 16-byte header (magic, uint32 edge count, uint64 frame count) + packed frames."""
    frames = np.asarray(frames, dtype=bool)
    if frames.ndim != 2:
        raise ValueError("frames must be a 2-d array (frame, edge)")
    n_frames, m = frames.shape
    with open(path, "wb") as fh:
        fh.write(FRAME_MAGIC + struct.pack("<IQ", m, n_frames))
        fh.write(np.packbits(frames, axis=1, bitorder="little").tobytes())


def read_frames(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != FRAME_MAGIC:
        raise ValueError("not a trajectory file")
    m, n_frames = struct.unpack("<IQ", data[4:16])
    width = (m + 7) // 8
    packed = np.frombuffer(data[16:], dtype=np.uint8).reshape(n_frames, width)
    return np.unpackbits(packed, axis=1, count=m, bitorder="little").astype(bool)
