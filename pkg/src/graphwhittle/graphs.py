"""Weighted graphs, normalized adjacency operators, and nested subgraph sequences.

Vertices are dense integers 0..N-1.  Weights are stored in a sparse symmetric
matrix; construction uses raw weight 1 on every edge and normalization (divide
by the degree bound) is a separate, idempotent step so that the operator norm
of the normalized adjacency is at most 1.

A builder records the ``frontier``: the vertices whose neighborhoods are
truncated relative to the infinite graph the finite host stands in for (e.g.
the two ends of a path).  Padding checks in downstream modules measure the
distance from an observation window to this frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError

UNREACHABLE = math.inf

GRAPH_KINDS = ("path", "cycle", "grid2d", "torus2d", "rhombus_chain", "pattern_lattice")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph with a bounded-degree adjacency operator."""

    weights: sp.csr_matrix
    degree_bound: int
    frontier: np.ndarray
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        off_diag = self.weights.nnz - (self.weights.diagonal() != 0).sum()
        return int(off_diag) // 2 + int((self.weights.diagonal() != 0).sum())

    def degrees(self) -> np.ndarray:
        """Neighbor counts (number of j with W_ij != 0)."""
        pattern = self.weights.copy()
        pattern.data = np.ones_like(pattern.data)
        return np.asarray(pattern.sum(axis=1)).ravel().astype(int)

    def neighbors(self, i: int) -> np.ndarray:
        return self.weights.indices[self.weights.indptr[i]:self.weights.indptr[i + 1]]


def _graph_from_edges(n: int, edges: list[tuple[int, int, float]], frontier, meta) -> Graph:
    if n <= 0:
        raise InvalidParameterError(f"graph needs at least one vertex, got n={n}")
    mirrored = [e for e in edges if e[0] != e[1]]
    rows = [e[0] for e in edges] + [e[1] for e in mirrored]
    cols = [e[1] for e in edges] + [e[0] for e in mirrored]
    vals = [e[2] for e in edges] + [e[2] for e in mirrored]
    w = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    w.sum_duplicates()
    degs = np.diff(w.indptr)
    degree_bound = int(degs.max()) if w.nnz else 1
    return Graph(
        weights=w,
        degree_bound=degree_bound,
        frontier=np.asarray(sorted(frontier), dtype=int),
        meta=dict(meta),
    )


def build_graph(kind: str, **params) -> Graph:
    """Construct a named graph with raw unit weights.

    Kinds and parameters:
      path, cycle:      length
      grid2d, torus2d:  side (vertex id = x * side + y)
      rhombus_chain:    k rhombi of 4 vertices (left, top, bottom, right),
                        consecutive rhombi joined right-to-left by one edge
      pattern_lattice:  pattern (Graph), count, attach_left, attach_right,
                        cyclic (replicate the pattern count times, joining
                        copies by a single edge between the attach vertices)
    """
    if kind == "path":
        n = int(params["length"])
        if n <= 0:
            raise InvalidParameterError(f"path length must be positive, got {n}")
        edges = [(i, i + 1, 1.0) for i in range(n - 1)]
        frontier = [0, n - 1] if n > 1 else [0]
        return _graph_from_edges(n, edges, frontier, {"kind": kind, "length": n})

    if kind == "cycle":
        n = int(params["length"])
        if n < 3:
            raise InvalidParameterError(f"cycle length must be >= 3, got {n}")
        edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
        return _graph_from_edges(n, edges, [], {"kind": kind, "length": n})

    if kind in ("grid2d", "torus2d"):
        s = int(params["side"])
        if s <= 0:
            raise InvalidParameterError(f"side must be positive, got {s}")
        if kind == "torus2d" and s < 3:
            raise InvalidParameterError(f"torus side must be >= 3, got {s}")
        edges = []
        for x in range(s):
            for y in range(s):
                i = x * s + y
                if x + 1 < s:
                    edges.append((i, (x + 1) * s + y, 1.0))
                elif kind == "torus2d":
                    edges.append((i, y, 1.0))
                if y + 1 < s:
                    edges.append((i, x * s + y + 1, 1.0))
                elif kind == "torus2d":
                    edges.append((i, x * s, 1.0))
        if kind == "grid2d":
            frontier = [x * s + y for x in range(s) for y in range(s)
                        if x in (0, s - 1) or y in (0, s - 1)]
        else:
            frontier = []
        return _graph_from_edges(s * s, edges, frontier, {"kind": kind, "side": s})

    if kind == "rhombus_chain":
        k = int(params["k"])
        if k <= 0:
            raise InvalidParameterError(f"rhombus count must be positive, got {k}")
        # rhombus r occupies ids 4r..4r+3 as (left, top, bottom, right)
        edges = []
        for r in range(k):
            left, top, bottom, right = 4 * r, 4 * r + 1, 4 * r + 2, 4 * r + 3
            edges += [(left, top, 1.0), (left, bottom, 1.0),
                      (top, right, 1.0), (bottom, right, 1.0)]
            if r + 1 < k:
                edges.append((right, 4 * (r + 1), 1.0))
        frontier = [0, 4 * k - 1]  # the two connector stubs missing from a finite chain
        return _graph_from_edges(4 * k, edges, frontier, {"kind": kind, "k": k})

    if kind == "pattern_lattice":
        pattern: Graph = params["pattern"]
        count = int(params["count"])
        left = int(params["attach_left"])
        right = int(params["attach_right"])
        cyclic = bool(params.get("cyclic", False))
        if count <= 0:
            raise InvalidParameterError(f"replication count must be positive, got {count}")
        p = pattern.n_vertices
        if not (0 <= left < p and 0 <= right < p):
            raise InvalidParameterError("attach vertices must belong to the pattern")
        coo = sp.triu(pattern.weights).tocoo()
        edges = []
        for c in range(count):
            base = c * p
            edges += [(base + i, base + j, float(v))
                      for i, j, v in zip(coo.row, coo.col, coo.data)]
            if c + 1 < count:
                edges.append((base + right, (c + 1) * p + left, 1.0))
        if cyclic and count > 1:
            edges.append(((count - 1) * p + right, left, 1.0))
            frontier = []
        else:
            frontier = [left, (count - 1) * p + right]
        return _graph_from_edges(count * p, edges, frontier,
                                 {"kind": kind, "count": count, "pattern_size": p})

    raise InvalidParameterError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")


def normalize_weights(g: Graph) -> Graph:
    """Divide every weight by the degree bound; idempotent."""
    if g.n_vertices == 0:
        raise InvalidParameterError("cannot normalize an empty graph")
    if g.normalized:
        return g
    if g.degree_bound < 1:
        raise InvalidParameterError("degree bound must be >= 1")
    w = g.weights.copy()
    w.data = w.data / g.degree_bound
    return Graph(weights=w, degree_bound=g.degree_bound, frontier=g.frontier,
                 normalized=True, meta=g.meta)


def distances_from(g: Graph, sources) -> np.ndarray:
    """BFS hop distances from a set of source vertices; -1 marks unreachable."""
    n = g.n_vertices
    dist = np.full(n, -1, dtype=np.int64)
    sources = np.atleast_1d(np.asarray(sources, dtype=int))
    if sources.size == 0:
        return dist
    if sources.min() < 0 or sources.max() >= n:
        raise InvalidParameterError("source vertex outside the graph")
    dist[sources] = 0
    indptr, indices = g.weights.indptr, g.weights.indices
    frontier = sources
    d = 0
    while frontier.size:
        d += 1
        nxt = np.unique(np.concatenate([indices[indptr[i]:indptr[i + 1]] for i in frontier]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    return dist


def graph_distance(g: Graph, i: int, j: int) -> float:
    """Shortest-path hop count over nonzero-weight edges; inf if disconnected."""
    n = g.n_vertices
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameterError(f"vertices ({i}, {j}) outside graph of size {n}")
    if i == j:
        return 0
    d = distances_from(g, [i])[j]
    return UNREACHABLE if d < 0 else int(d)


def boundary_size(g: Graph, subset) -> int:
    """Count vertices of the subset having at least one neighbor outside it."""
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        return 0
    inside = np.zeros(g.n_vertices, dtype=bool)
    inside[subset] = True
    indptr, indices = g.weights.indptr, g.weights.indices
    count = 0
    for i in subset:
        if not inside[indices[indptr[i]:indptr[i + 1]]].all():
            count += 1
    return count


@dataclass(frozen=True, eq=False)
class NestedSubgraphs:
    """A strictly increasing sequence of vertex subsets with volume and boundary stats."""

    host: Graph
    levels: list  # list of sorted int arrays
    volumes: np.ndarray
    boundaries: np.ndarray

    def __post_init__(self):
        prev = None
        for lev, m in zip(self.levels, self.volumes):
            if len(lev) != m:
                raise InvalidParameterError("volume does not match level size")
            if prev is not None:
                if not (m > len(prev) and np.isin(prev, lev).all()):
                    raise InvalidParameterError("levels must be strictly increasing and nested")
            prev = lev


def nested_subgraphs(g: Graph, kind: str, **params) -> NestedSubgraphs:
    """Build ball (BFS around a center) or box (axis-aligned, grid hosts) level sets."""
    if kind == "ball":
        center = int(params["center"])
        radii = sorted(set(int(r) for r in params["radii"]))
        if not (0 <= center < g.n_vertices):
            raise InvalidParameterError(f"center {center} not in graph")
        if not radii or radii[0] < 0:
            raise InvalidParameterError("radii must be nonnegative")
        dist = distances_from(g, [center])
        levels = []
        for r in radii:
            lev = np.flatnonzero((dist >= 0) & (dist <= r))
            if levels and len(lev) == len(levels[-1]):
                continue  # host exhausted or radius adds nothing
            levels.append(lev)
    elif kind == "box":
        if g.meta.get("kind") not in ("grid2d", "torus2d"):
            raise InvalidParameterError("box subgraphs require a grid-structured host")
        side = g.meta["side"]
        sides = sorted(set(int(b) for b in params["sides"]))
        anchor = params.get("anchor", "center")
        if sides[0] <= 0 or sides[-1] > side:
            raise InvalidParameterError(f"box sides must lie in 1..{side}")
        levels = []
        for b in sides:
            off = (side - b) // 2 if anchor == "center" else int(params.get("offset", 0))
            idx = [(off + x) * side + (off + y) for x in range(b) for y in range(b)]
            levels.append(np.asarray(sorted(idx), dtype=int))
        # centered boxes of mixed parity are not nested; shift to enforce nesting
        for k in range(1, len(levels)):
            if not np.isin(levels[k - 1], levels[k]).all():
                raise InvalidParameterError(
                    "box levels are not nested; use sides of equal parity")
    else:
        raise InvalidParameterError(f"unknown subgraph kind {kind!r}")

    volumes = np.array([len(lev) for lev in levels], dtype=int)
    bounds = np.array([boundary_size(g, lev) for lev in levels], dtype=int)
    return NestedSubgraphs(host=g, levels=levels, volumes=volumes, boundaries=bounds)


def ball_radius_for_volume(g: Graph, center: int, target: int) -> tuple[int, int]:
    """Smallest radius whose ball volume is closest to target; returns (radius, volume)."""
    dist = distances_from(g, [center])
    reach = dist[dist >= 0]
    best = (0, 1)
    for r in range(0, int(reach.max()) + 1):
        m = int((reach <= r).sum())
        if abs(m - target) < abs(best[1] - target):
            best = (r, m)
        if m >= target:
            break
    return best


def save_graph(g: Graph, path) -> None:
    """Edge-list text format: header 'n_vertices degree_bound', lines 'i j w'."""
    coo = sp.triu(g.weights, k=0).tocoo()
    with open(path, "w") as fh:
        fh.write(f"{g.n_vertices} {g.degree_bound}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.17g}\n")


def load_graph(path) -> Graph:
    """Load the edge-list format written by save_graph.

    Each undirected edge appears once, so symmetry holds by construction.  A
    loaded graph is treated as a complete universe (empty frontier).
    """
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidParameterError(f"malformed graph header in {path}")
        n, degree_bound = int(header[0]), int(header[1])
        edges = []
        seen = set()
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameterError(f"edge ({i},{j}) outside 0..{n-1}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidParameterError(f"duplicate edge ({i},{j}) in {path}")
            seen.add(key)
            edges.append((i, j, v))
    g = _graph_from_edges(n, edges, [], {"kind": "file", "path": str(path)})
    return Graph(weights=g.weights, degree_bound=degree_bound, frontier=g.frontier,
                 normalized=False, meta=g.meta)
