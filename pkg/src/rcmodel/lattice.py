"""Doubly periodic planar lattices, rectangle regions and planar duals.

A lattice is described by a unit cell: a handful of vertex positions inside
the fundamental domain, two period vectors and a list of edge generators
``(i, j, dx, dy)`` joining vertex ``i`` of cell ``(x, y)`` to vertex ``j`` of
cell ``(x + dx, y + dy)``.  Regions are the subgraphs induced by the lattice
vertices lying in an axis-parallel rectangle.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_TOL = 1e-9
SIDES = ("left", "right", "bottom", "top")


class RegionError(ValueError):
    """Raised for empty, disconnected or otherwise unusable regions."""


class EmbeddingError(ValueError):
    """Raised when a straight-line embedding is not a valid plane graph."""


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _segments_cross(p1, p2, p3, p4) -> bool:
    """Proper intersection test; touching at a shared endpoint is allowed."""
    d1 = _cross(np.subtract(p4, p3), np.subtract(p1, p3))
    d2 = _cross(np.subtract(p4, p3), np.subtract(p2, p3))
    d3 = _cross(np.subtract(p2, p1), np.subtract(p3, p1))
    d4 = _cross(np.subtract(p2, p1), np.subtract(p4, p1))
    if ((d1 > _TOL and d2 < -_TOL) or (d1 < -_TOL and d2 > _TOL)) and (
        (d3 > _TOL and d4 < -_TOL) or (d3 < -_TOL and d4 > _TOL)
    ):
        return True
    # collinear overlap
    if abs(d1) <= _TOL and abs(d2) <= _TOL:
        direction = np.subtract(p2, p1)
        length2 = float(np.dot(direction, direction))
        t3 = float(np.dot(np.subtract(p3, p1), direction)) / length2
        t4 = float(np.dot(np.subtract(p4, p1), direction)) / length2
        lo, hi = min(t3, t4), max(t3, t4)
        return min(hi, 1.0) - max(lo, 0.0) > _TOL
    return False


@dataclass(frozen=True)
class UnitCell:
    vertices: tuple[tuple[float, float], ...]
    edge_generators: tuple[tuple[int, int, int, int], ...]
    periods: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices))
        object.__setattr__(
            self, "edge_generators", tuple(tuple(int(t) for t in g) for g in self.edge_generators)
        )
        u, v = self.periods
        object.__setattr__(self, "periods", ((float(u[0]), float(u[1])), (float(v[0]), float(v[1]))))
        if not self.vertices:
            raise ValueError("unit cell needs at least one vertex")
        if abs(_cross(*self.periods)) <= 1e-12:
            raise ValueError("periods are collinear")
        seen = set()
        for i, j, dx, dy in self.edge_generators:
            if not (0 <= i < len(self.vertices) and 0 <= j < len(self.vertices)):
                raise ValueError(f"edge generator {(i, j, dx, dy)} references a missing vertex")
            if i == j and dx == 0 and dy == 0:
                raise ValueError("self-loop edge generator")
            key = min((i, j, dx, dy), (j, i, -dx, -dy))
            if key in seen:
                raise ValueError(f"duplicate edge generator {(i, j, dx, dy)}")
            seen.add(key)
        self._check_planar()

    def position(self, cx: int, cy: int, k: int) -> tuple[float, float]:
        (ux, uy), (vx, vy) = self.periods
        x, y = self.vertices[k]
        return (x + cx * ux + cy * vx, y + cx * uy + cy * vy)

    @property
    def max_edge_length(self) -> float:
        return max(
            math.dist(self.position(0, 0, i), self.position(dx, dy, j))
            for i, j, dx, dy in self.edge_generators
        )

    def _patch_segments(self, radius: int):
        segs = []
        for cx in range(-radius, radius + 1):
            for cy in range(-radius, radius + 1):
                for i, j, dx, dy in self.edge_generators:
                    segs.append((self.position(cx, cy, i), self.position(cx + dx, cy + dy, j)))
        return segs

    def _check_planar(self):
        span = max((abs(t) for g in self.edge_generators for t in g[2:]), default=0)
        central = []
        for i, j, dx, dy in self.edge_generators:
            central.append((self.position(0, 0, i), self.position(dx, dy, j)))
        for a, b in central:
            if math.dist(a, b) <= _TOL:
                raise ValueError("edge generator of zero length")
        for s in central:
            for t in self._patch_segments(span + 1):
                if s == t or (s[0] == t[1] and s[1] == t[0]):
                    continue
                if _segments_cross(s[0], s[1], t[0], t[1]):
                    raise EmbeddingError(f"edges {s} and {t} cross")

    @classmethod
    def from_json(cls, source) -> "UnitCell":
        """Load ``{"vertices": [[x,y],...], "edges": [[i,j,dx,dy],...], "periods": [[ux,uy],[vx,vy]]}``.

        ``source`` may be a path or an already parsed mapping.
        """
        if not isinstance(source, dict):
            source = json.loads(Path(source).read_text())
        return cls(
            vertices=tuple(tuple(v) for v in source["vertices"]),
            edge_generators=tuple(tuple(e) for e in source["edges"]),
            periods=tuple(tuple(p) for p in source["periods"]),
        )

    def to_json(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "edges": [list(e) for e in self.edge_generators],
            "periods": [list(p) for p in self.periods],
        }


_S3 = math.sqrt(3.0)

SQUARE_CELL = UnitCell(
    vertices=((0.0, 0.0),),
    edge_generators=((0, 0, 1, 0), (0, 0, 0, 1)),
    periods=((1.0, 0.0), (0.0, 1.0)),
)
TRIANGULAR_CELL = UnitCell(
    vertices=((0.0, 0.0),),
    edge_generators=((0, 0, 1, 0), (0, 0, 0, 1), (0, 0, -1, 1)),
    periods=((1.0, 0.0), (0.5, _S3 / 2)),
)
# unit edge length, one vertical edge per cell, a hexagon centred at the origin
HEXAGONAL_CELL = UnitCell(
    vertices=((-_S3 / 2, -0.5), (-_S3 / 2, 0.5)),
    edge_generators=((0, 1, 0, 0), (0, 1, 0, -1), (0, 1, 1, -1)),
    periods=((_S3, 0.0), (_S3 / 2, 1.5)),
)


@dataclass(frozen=True)
class LatticeSpec:
    variant: str
    cell: UnitCell

    @classmethod
    def custom(cls, cell: UnitCell, check_symmetry: bool = True) -> "LatticeSpec":
        if check_symmetry:
            problems = symmetry_report(cell)
            if problems:
                warnings.warn("custom lattice lacks symmetries: " + "; ".join(problems), stacklevel=2)
        return cls("custom", cell)

    @classmethod
    def from_name(cls, name: str) -> "LatticeSpec":
        try:
            return BUILTIN_LATTICES[name.lower()]
        except KeyError:
            raise ValueError(f"unknown lattice {name!r}; expected one of {sorted(BUILTIN_LATTICES)}") from None


SQUARE = LatticeSpec("square", SQUARE_CELL)
TRIANGULAR = LatticeSpec("triangular", TRIANGULAR_CELL)
HEXAGONAL = LatticeSpec("hexagonal", HEXAGONAL_CELL)
BUILTIN_LATTICES = {"square": SQUARE, "triangular": TRIANGULAR, "hexagonal": HEXAGONAL}


def _patch_points(cell: UnitCell, radius: int):
    pts = {}
    for cx in range(-radius, radius + 1):
        for cy in range(-radius, radius + 1):
            for k in range(len(cell.vertices)):
                pts[(cx, cy, k)] = cell.position(cx, cy, k)
    return pts


def symmetry_report(cell: UnitCell, radius: int = 3) -> list[str]:
    """Check reflection in the vertical axis and rotation by pi/2 or pi/3.

    Returns a list of human readable problems (empty when both hold on a
    patch of cells around the origin).  Used for warnings only.
    """
    pts = _patch_points(cell, radius + 3)

    def snap(p):
        return (round(p[0], 5) + 0.0, round(p[1], 5) + 0.0)

    lookup = {snap(p) for p in pts.values()}
    near = 1.5 * max(math.hypot(*cell.periods[0]), math.hypot(*cell.periods[1]))
    raw_edges = []
    for (cx, cy, i), p in pts.items():
        for a, b, dx, dy in cell.edge_generators:
            if a == i and (cx + dx, cy + dy, b) in pts:
                raw_edges.append((p, pts[(cx + dx, cy + dy, b)]))
    edges = {frozenset({snap(p), snap(q)}) for p, q in raw_edges}

    def maps_onto(transform) -> bool:
        for p in pts.values():
            if math.hypot(*p) <= near and snap(transform(*p)) not in lookup:
                return False
        for p, q in raw_edges:
            if math.hypot(*p) <= near and frozenset({snap(transform(*p)), snap(transform(*q))}) not in edges:
                return False
        return True

    problems = []
    if not maps_onto(lambda x, y: (-x, y)):
        problems.append("not invariant under reflection x -> -x")
    rotations = []
    for theta in (math.pi / 2, math.pi / 3):
        c, s = math.cos(theta), math.sin(theta)
        rotations.append(maps_onto(lambda x, y, c=c, s=s: (c * x - s * y, s * x + c * y)))
    if not any(rotations):
        problems.append("not invariant under rotation by pi/2 or pi/3 about the origin")
    return problems


@dataclass(frozen=True, eq=False)
class Region:
    """Finite induced subgraph of a lattice (or a dual graph built from one).

    Vertices are indexed ``0..V-1`` in lexicographic ``(x, y)`` order for
    rectangles; edges are ``(u, v)`` index pairs with ``u <= v``.
    """

    vertices: np.ndarray
    edges: np.ndarray
    boundary: frozenset
    bbox: tuple[float, float, float, float]
    sides: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.edges.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def side(self, label: str) -> frozenset:
        return self.sides.get(label, frozenset())

    def vertex_at(self, x: float, y: float) -> int:
        """Index of the vertex at (x, y); convenience for tests and the CLI."""
        d = np.hypot(self.vertices[:, 0] - x, self.vertices[:, 1] - y)
        i = int(np.argmin(d))
        if d[i] > 1e-6:
            raise KeyError(f"no vertex at {(x, y)}")
        return i

    def edge_index(self, u: int, v: int) -> int:
        a, b = min(u, v), max(u, v)
        hits = np.flatnonzero((self.edges[:, 0] == a) & (self.edges[:, 1] == b))
        if not len(hits):
            raise KeyError(f"no edge {(u, v)}")
        return int(hits[0])

    def edge_list_text(self) -> str:
        """One line ``i j x_i y_i x_j y_j`` per edge."""
        lines = []
        for i, j in self.edges:
            xi, yi = self.vertices[i]
            xj, yj = self.vertices[j]
            lines.append(f"{i} {j} {xi!r} {yi!r} {xj!r} {yj!r}")
        return "\n".join(lines) + ("\n" if lines else "")

    def export_edge_list(self, path) -> None:
        Path(path).write_text(self.edge_list_text())


def build_region(lattice: LatticeSpec, a: float, b: float, c: float, d: float) -> Region:
    """Subgraph induced by the lattice vertices in ``[a, b] x [c, d]``."""
    if not (a < b and c < d):
        raise ValueError(f"degenerate rectangle [{a}, {b}] x [{c}, {d}]")
    cell = lattice.cell
    (ux, uy), (vx, vy) = cell.periods
    inv = np.linalg.inv(np.array([[ux, vx], [uy, vy]]))
    reach = max(math.hypot(x, y) for x, y in cell.vertices) + 1.0
    corners = np.array(
        [[a - reach, c - reach], [a - reach, d + reach], [b + reach, c - reach], [b + reach, d + reach]]
    )
    ij = corners @ inv.T
    imin, jmin = np.floor(ij.min(axis=0)).astype(int) - 1
    imax, jmax = np.ceil(ij.max(axis=0)).astype(int) + 1

    inside = []
    for cx in range(imin, imax + 1):
        for cy in range(jmin, jmax + 1):
            for k in range(len(cell.vertices)):
                x, y = cell.position(cx, cy, k)
                if a - _TOL <= x <= b + _TOL and c - _TOL <= y <= d + _TOL:
                    inside.append((round(x, 9), round(y, 9), x, y, (cx, cy, k)))
    if not inside:
        raise RegionError(f"no lattice vertex in [{a}, {b}] x [{c}, {d}]")
    inside.sort(key=lambda t: (t[0], t[1]))
    index = {t[4]: n for n, t in enumerate(inside)}
    coords = np.array([[t[2], t[3]] for t in inside], dtype=float)

    neighbours = []
    for i, j, dx, dy in cell.edge_generators:
        neighbours.append((i, j, dx, dy))
        neighbours.append((j, i, -dx, -dy))
    edges = set()
    boundary = set()
    for (cx, cy, k), n in index.items():
        for i, j, dx, dy in neighbours:
            if i != k:
                continue
            m = index.get((cx + dx, cy + dy, j))
            if m is None:
                boundary.add(n)
            else:
                edges.add((min(n, m), max(n, m)))
    edge_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)

    r = cell.max_edge_length
    x, y = coords[:, 0], coords[:, 1]
    near = {
        "left": x - a < r - _TOL,
        "right": b - x < r - _TOL,
        "bottom": y - c < r - _TOL,
        "top": d - y < r - _TOL,
    }
    sides = {s: frozenset(int(v) for v in np.flatnonzero(mask) if int(v) in boundary) for s, mask in near.items()}
    return Region(
        vertices=coords,
        edges=edge_arr,
        boundary=frozenset(boundary),
        bbox=(float(a), float(b), float(c), float(d)),
        sides=sides,
        name=f"{lattice.variant}[{a:g},{b:g}]x[{c:g},{d:g}]",
    )


def square_box(n: int, m: int | None = None, x0: float = 0.0, y0: float = 0.0) -> Region:
    """Square-lattice rectangle ``[x0, x0+n] x [y0, y0+m]``."""
    m = n if m is None else m
    return build_region(SQUARE, x0, x0 + n, y0, y0 + m)


def _components(n_vertices: int, edges: np.ndarray) -> int:
    parent = list(range(n_vertices))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    count = n_vertices
    for u, v in edges:
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[ru] = rv
            count -= 1
    return count


@dataclass(frozen=True, eq=False)
class DualMap:
    """Planar dual of a region.

    ``dual_region`` has one vertex per bounded face (at the face barycenter)
    followed by a single vertex for the unbounded face, index ``outer``.
    Dual edge ``edge_pairs[k]`` crosses primal edge ``k``.  ``arcs[k]`` names
    the side of the primal rectangle that dual edge ``k`` leaves through when
    it is incident to the outer vertex ("north", "south", "west", "east") and
    is ``""`` otherwise.
    """

    primal: Region
    dual_region: Region
    edge_pairs: np.ndarray
    outer: int
    arcs: tuple[str, ...]
    n_faces: int

    @property
    def inverse_pairs(self) -> np.ndarray:
        inv = np.empty_like(self.edge_pairs)
        inv[self.edge_pairs] = np.arange(len(self.edge_pairs))
        return inv


def trace_faces(vertices: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Face label of every half-edge (``2k``: u->v, ``2k+1``: v->u).

    The successor of half-edge ``u->v`` is the half-edge out of ``v`` that
    follows ``v->u`` counterclockwise, so bounded faces are traced
    clockwise (negative signed area) and the unbounded face counterclockwise.
    """
    n = len(vertices)
    out = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        u, v = int(u), int(v)
        if u == v:
            raise EmbeddingError(f"edge {k} is a loop")
        out[u].append((math.atan2(vertices[v][1] - vertices[u][1], vertices[v][0] - vertices[u][0]), 2 * k))
        out[v].append((math.atan2(vertices[u][1] - vertices[v][1], vertices[u][0] - vertices[v][0]), 2 * k + 1))
    position = {}
    rotation = []
    for w, hs in enumerate(out):
        hs.sort()
        for t in range(len(hs)):
            gap = (hs[(t + 1) % len(hs)][0] - hs[t][0]) % (2 * math.pi)
            if len(hs) > 1 and gap <= 1e-9:
                raise EmbeddingError(f"coincident edge directions at vertex {w}")
        ids = [h for _, h in hs]
        rotation.append(ids)
        for t, h in enumerate(ids):
            position[h] = (w, t)

    def head(h):
        u, v = edges[h // 2]
        return int(v) if h % 2 == 0 else int(u)

    face = np.full(2 * len(edges), -1, dtype=np.int64)
    label = 0
    for start in range(2 * len(edges)):
        if face[start] >= 0:
            continue
        h = start
        while face[h] < 0:
            face[h] = label
            w, t = position[h ^ 1]
            ids = rotation[w]
            h = ids[(t + 1) % len(ids)]
            if head(h ^ 1) != w:  # pragma: no cover - structural sanity
                raise EmbeddingError("inconsistent rotation system")
        label += 1
    return face


def dual_region(region: Region) -> DualMap:
    """Planar dual built by rotation-system face tracing."""
    V, E = region.n_vertices, region.n_edges
    if _components(V, region.edges) != 1:
        raise RegionError("region is disconnected")
    face = trace_faces(region.vertices, region.edges)
    n_faces = int(face.max()) + 1 if E else 1
    if V - E + n_faces != 2:
        raise EmbeddingError(f"Euler check failed: V-E+F = {V - E + n_faces}")

    area = np.zeros(n_faces)
    members = [[] for _ in range(n_faces)]
    for h in range(2 * E):
        u, v = region.edges[h // 2]
        if h % 2:
            u, v = v, u
        (x1, y1), (x2, y2) = region.vertices[u], region.vertices[v]
        area[face[h]] += 0.5 * (x1 * y2 - x2 * y1)
        members[face[h]].append(int(u))
    outer_faces = np.flatnonzero(area >= -_TOL)
    if len(outer_faces) != 1:
        raise EmbeddingError(f"expected one unbounded face, found {len(outer_faces)}")
    outer_face = int(outer_faces[0])
    if n_faces < 2:
        raise RegionError("region has no bounded face")

    order = [f for f in range(n_faces) if f != outer_face] + [outer_face]
    relabel = {f: i for i, f in enumerate(order)}
    outer = n_faces - 1
    a, b, c, d = region.bbox
    coords = np.empty((n_faces, 2))
    for f in range(n_faces):
        if f == outer_face:
            coords[relabel[f]] = (0.5 * (a + b), d + (d - c) + 1.0)
        else:
            coords[relabel[f]] = region.vertices[members[f]].mean(axis=0)

    dual_edges = np.empty((E, 2), dtype=np.int64)
    arcs = []
    primal_sides = [("north", "top"), ("south", "bottom"), ("west", "left"), ("east", "right")]
    for k in range(E):
        f, g = relabel[int(face[2 * k])], relabel[int(face[2 * k + 1])]
        dual_edges[k] = (min(f, g), max(f, g))
        arc = ""
        if outer in (f, g):
            u, v = (int(t) for t in region.edges[k])
            for name, side in primal_sides:
                s = region.side(side)
                if u in s and v in s:
                    arc = name
                    break
        arcs.append(arc)

    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    dual = Region(
        vertices=coords,
        edges=dual_edges,
        boundary=frozenset({outer}),
        bbox=(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])),
        sides={},
        name=f"dual({region.name})",
    )
    return DualMap(
        primal=region,
        dual_region=dual,
        edge_pairs=np.arange(E, dtype=np.int64),
        outer=outer,
        arcs=tuple(arcs),
        n_faces=n_faces,
    )


def pstar(p: float, q: float) -> float:
    """Dual edge weight: the solution of p p* / ((1-p)(1-p*)) = q."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    num = q * (1.0 - p)
    return num / (num + p)


def _bisect(f, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-13) -> float:
    flo = f(lo)
    if flo == 0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def solve_critical_point(lattice: LatticeSpec | str, q: float) -> float:
    """Critical edge weight of the square, triangular or hexagonal lattice."""
    if isinstance(lattice, str):
        lattice = LatticeSpec.from_name(lattice)
    if q < 1:
        raise ValueError(f"critical points are given for q >= 1, got {q}")
    if lattice.variant == "square":
        s = math.sqrt(q)
        return s / (1.0 + s)
    if lattice.variant == "triangular":
        return _bisect(lambda p: p**3 + 3 * p**2 * (1 - p) - q * (1 - p) ** 3)
    if lattice.variant == "hexagonal":
        return _bisect(lambda p: p**3 - 3 * q * p * (1 - p) ** 2 - q**2 * (1 - p) ** 3)
    raise ValueError(f"no critical point formula for lattice variant {lattice.variant!r}")
