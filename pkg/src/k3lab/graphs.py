"""Exact path metrics on finite weighted graphs.

Points may sit at vertices or inside edges; distances are infimum path
lengths.  Queries reduce to vertex Dijkstra with up to two virtual
terminals per endpoint, so the all-pairs vertex matrix (computed once
and cached) makes repeated point queries O(1).  Edge lengths may be
floats or exact rationals (``int``/``Fraction``); with rational lengths
the dense matrix is computed in scaled integer arithmetic and is exact.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

__all__ = [
    "UnreachableError",
    "GraphFormatError",
    "Vertex",
    "OnEdge",
    "EdgeTraversal",
    "PathWitness",
    "MetricGraph",
    "graph_from_json",
    "graph_to_json",
]

_MAX_EXACT = float(2**53)


class UnreachableError(RuntimeError):
    """No path exists between the queried points."""


class GraphFormatError(ValueError):
    """Malformed graph description."""


@dataclass(frozen=True)
class Vertex:
    label: Hashable

    def __repr__(self):
        return f"Vertex({self.label!r})"


@dataclass(frozen=True)
class OnEdge:
    edge: int
    offset: float

    def __repr__(self):
        return f"OnEdge({self.edge}, {self.offset!r})"


GraphPoint = Vertex | OnEdge


@dataclass(frozen=True)
class EdgeTraversal:
    """A walk along one edge from offset ``start`` to offset ``end``."""

    edge: int
    start: float
    end: float

    @property
    def length(self):
        return abs(self.end - self.start)


@dataclass(frozen=True)
class PathWitness:
    """A concrete path: endpoints plus the edge traversals between them.

    The total length always equals the sum of the traversed sub-lengths;
    ``validate`` additionally checks that consecutive traversals meet at
    a common vertex.
    """

    start: GraphPoint
    end: GraphPoint
    traversals: tuple[EdgeTraversal, ...]

    @property
    def total_length(self):
        return sum((t.length for t in self.traversals), 0)

    def elements(self, graph: "MetricGraph") -> list:
        """Alternating [point, traversal, point, ...] view of the path."""
        out: list = [self.start]
        for t in self.traversals:
            out.append(t)
            out.append(graph.normalize(OnEdge(t.edge, t.end)))
        if out[-1] != self.end:
            out[-1] = self.end
        return out

    def validate(self, graph: "MetricGraph") -> None:
        at = graph.normalize(self.start)
        for t in self.traversals:
            u, v, length = graph.edge_info(t.edge)
            for off in (t.start, t.end):
                if off < -1e-12 or off > length + 1e-12:
                    raise ValueError(f"offset {off} outside edge {t.edge} of length {length}")
            entry = graph.normalize(OnEdge(t.edge, t.start))
            if isinstance(at, Vertex):
                if entry != at:
                    raise ValueError(f"traversal {t} does not start at {at}")
            else:
                if entry != at:
                    raise ValueError(f"traversal {t} does not continue the path at {at}")
            at = graph.normalize(OnEdge(t.edge, t.end))
        if at != graph.normalize(self.end):
            raise ValueError("path does not end at its declared endpoint")

    def point_at(self, t) -> GraphPoint:
        """Point at arc length ``t`` from the start."""
        if t < -1e-9:
            raise ValueError("arc length must be nonnegative")
        t = max(t, 0.0)
        for trav in self.traversals:
            if t <= trav.length:
                direction = 1.0 if trav.end >= trav.start else -1.0
                return OnEdge(trav.edge, trav.start + direction * t)
            t -= trav.length
        if t > 1e-9:
            raise ValueError("arc length beyond the end of the path")
        return self.end

    def breakpoints(self) -> list[float]:
        """Arc-length positions of the path's endpoints and interior vertices."""
        out = [0.0]
        acc = 0.0
        for trav in self.traversals:
            acc += trav.length
            out.append(acc)
        return out

    def reversed(self) -> "PathWitness":
        travs = tuple(EdgeTraversal(t.edge, t.end, t.start) for t in reversed(self.traversals))
        return PathWitness(self.end, self.start, travs)


class MetricGraph:
    """Finite connected weighted graph with positive edge lengths.

    Vertices are opaque hashable labels; edges are (u, v, length) with
    parallel edges and self-loops allowed.  Immutable after construction,
    so concurrent read-only queries are safe.
    """

    def __init__(self, vertices: Sequence[Hashable], edges: Sequence[tuple]):
        self._labels = list(vertices)
        if len(set(self._labels)) != len(self._labels):
            raise GraphFormatError("duplicate vertex labels")
        self._index = {lab: i for i, lab in enumerate(self._labels)}
        self._edges: list[tuple[int, int, object]] = []
        for e in edges:
            u, v, length = e
            if u not in self._index or v not in self._index:
                raise GraphFormatError(f"edge {e!r} references an unknown vertex")
            if not (length > 0):
                raise GraphFormatError(f"edge {e!r} must have positive length")
            self._edges.append((self._index[u], self._index[v], length))
        self._adj: list[list[tuple[int, object, int]]] = [[] for _ in self._labels]
        for eid, (ui, vi, length) in enumerate(self._edges):
            self._adj[ui].append((vi, length, eid))
            if vi != ui:
                self._adj[vi].append((ui, length, eid))
        self._matrix = None
        self._exact = None

    # -- basic accessors -------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self._labels)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def vertex_labels(self) -> list:
        return list(self._labels)

    def has_vertex(self, label) -> bool:
        return label in self._index

    def vertex_index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise GraphFormatError(f"unknown vertex {label!r}") from None

    def edge_info(self, eid: int) -> tuple[Hashable, Hashable, object]:
        ui, vi, length = self._edges[eid]
        return (self._labels[ui], self._labels[vi], length)

    def edge_list(self) -> list[tuple]:
        return [self.edge_info(eid) for eid in range(len(self._edges))]

    def total_length(self):
        return sum(length for _, _, length in self._edges)

    def is_connected(self) -> bool:
        if not self._labels:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self._labels)

    # -- points ----------------------------------------------------------

    def normalize(self, p: GraphPoint) -> GraphPoint:
        """Snap offsets 0 and full-length to the corresponding vertex."""
        if isinstance(p, Vertex):
            if p.label not in self._index:
                raise GraphFormatError(f"unknown vertex {p.label!r}")
            return p
        if isinstance(p, OnEdge):
            if not 0 <= p.edge < len(self._edges):
                raise GraphFormatError(f"unknown edge id {p.edge}")
            ui, vi, length = self._edges[p.edge]
            if p.offset < 0 or p.offset > length:
                raise GraphFormatError(f"offset {p.offset} outside edge of length {length}")
            if p.offset == 0:
                return Vertex(self._labels[ui])
            if p.offset == length:
                return Vertex(self._labels[vi])
            return p
        raise GraphFormatError(f"not a graph point: {p!r}")

    def sample_grid(self, h) -> list[GraphPoint]:
        """All vertices plus interior points spaced at most ``h`` apart.

        Every point of the graph lies within h/2 of some sample along
        its own edge.
        """
        if not (h > 0):
            raise ValueError("grid spacing must be positive")
        out: list[GraphPoint] = [Vertex(lab) for lab in self._labels]
        for eid, (_, _, length) in enumerate(self._edges):
            k = max(1, math.ceil(length / h))
            step = length / k
            out.extend(OnEdge(eid, j * step) for j in range(1, k))
        return out

    # -- anchors: (vertex index, offset) pairs reaching a point ----------

    def _anchors(self, p: GraphPoint) -> list[tuple[int, object]]:
        if isinstance(p, Vertex):
            return [(self._index[p.label], 0)]
        ui, vi, length = self._edges[p.edge]
        return [(ui, p.offset), (vi, length - p.offset)]

    # -- Dijkstra --------------------------------------------------------

    def _run_dijkstra(self, seeds):
        """Multi-seed Dijkstra.  Returns (dist, pred) lists.

        ``seeds`` is a list of (vertex index, initial distance, token);
        ``pred[v]`` is either ("seed", token) or ("edge", u, eid).  Ties
        prefer the smaller (predecessor index, edge id), making the tree
        and hence every reported witness deterministic.
        """
        n = len(self._labels)
        dist: list = [None] * n
        pred: list = [None] * n
        heap = []
        for vi, d0, token in seeds:
            if dist[vi] is None or d0 < dist[vi] or (d0 == dist[vi] and pred[vi][0] == "seed" and token < pred[vi][1]):
                dist[vi] = d0
                pred[vi] = ("seed", token)
                heapq.heappush(heap, (d0, vi))
        done = [False] * n
        while heap:
            d, u = heapq.heappop(heap)
            if done[u] or d > dist[u]:
                continue
            done[u] = True
            for v, w, eid in self._adj[u]:
                nd = d + w
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    pred[v] = ("edge", u, eid)
                    heapq.heappush(heap, (nd, v))
                elif nd == dist[v] and not done[v] and pred[v][0] == "edge":
                    if (u, eid) < (pred[v][1], pred[v][2]):
                        pred[v] = ("edge", u, eid)
        return dist, pred

    def distance(self, p: GraphPoint, q: GraphPoint):
        """Exact infimum path length between two points.

        Symmetric, satisfies the triangle inequality, and is zero exactly
        when the normalized points coincide.  Uses the cached dense matrix
        when one exists (float arithmetic); without it the query runs a
        fresh Dijkstra, which stays in exact arithmetic for rational edge
        lengths.  Raises UnreachableError if the points lie in different
        components.
        """
        p = self.normalize(p)
        q = self.normalize(q)
        if p == q:
            return 0.0
        best = None
        if isinstance(p, OnEdge) and isinstance(q, OnEdge) and p.edge == q.edge:
            best = abs(p.offset - q.offset)
        ap = self._anchors(p)
        aq = self._anchors(q)
        if self._matrix is not None:
            m = self._matrix
            for vi, du in ap:
                for wi, dv in aq:
                    cand = du + m[vi, wi] + dv
                    if best is None or cand < best:
                        best = cand
        else:
            dist, _ = self._run_dijkstra([(vi, du, k) for k, (vi, du) in enumerate(ap)])
            for wi, dv in aq:
                if dist[wi] is None:
                    continue
                cand = dist[wi] + dv
                if best is None or cand < best:
                    best = cand
        if best is None or best == math.inf:
            raise UnreachableError(f"{p!r} and {q!r} are in different components")
        return best

    def shortest_path(self, p: GraphPoint, q: GraphPoint) -> PathWitness:
        """A witness path of length ``distance(p, q)``.

        Deterministic: among equally short routes the one whose relaxation
        steps carry the smaller (vertex index, edge id) wins, and for two
        points on one edge the intra-edge route wins ties.
        """
        p = self.normalize(p)
        q = self.normalize(q)
        if p == q:
            return PathWitness(p, q, ())
        intra = None
        if isinstance(p, OnEdge) and isinstance(q, OnEdge) and p.edge == q.edge:
            intra = abs(p.offset - q.offset)
        ap = self._anchors(p)
        aq = self._anchors(q)
        dist, pred = self._run_dijkstra([(vi, du, k) for k, (vi, du) in enumerate(ap)])
        best = None
        for k, (wi, dv) in enumerate(aq):
            if dist[wi] is None:
                continue
            cand = (dist[wi] + dv, wi, k)
            if best is None or cand < best:
                best = cand
        if best is None and intra is None:
            raise UnreachableError(f"{p!r} and {q!r} are in different components")
        if intra is not None and (best is None or intra <= best[0]):
            return PathWitness(p, q, (EdgeTraversal(p.edge, p.offset, q.offset),))
        total, wi, k = best
        # Walk predecessors back from the arrival anchor to a seed anchor.
        edges_rev = []
        at = wi
        while True:
            tag = pred[at]
            if tag[0] == "seed":
                seed_k = tag[1]
                break
            _, u, eid = tag
            edges_rev.append((u, eid, at))
            at = u
        travs: list[EdgeTraversal] = []
        if isinstance(p, OnEdge):
            seed_vi, seed_off = ap[seed_k]
            ui, vi, length = self._edges[p.edge]
            end_off = 0.0 if seed_vi == ui else length
            if seed_off > 0:
                travs.append(EdgeTraversal(p.edge, p.offset, end_off))
        for u, eid, v in reversed(edges_rev):
            ui, vi, length = self._edges[eid]
            if ui == u:
                travs.append(EdgeTraversal(eid, 0.0, length))
            else:
                travs.append(EdgeTraversal(eid, length, 0.0))
        if isinstance(q, OnEdge):
            arr_vi, arr_off = aq[k]
            ui, vi, length = self._edges[q.edge]
            start_off = 0.0 if arr_vi == ui else length
            if arr_off > 0:
                travs.append(EdgeTraversal(q.edge, start_off, q.offset))
        return PathWitness(p, q, tuple(travs))

    # -- dense matrices ----------------------------------------------------

    def _min_reduced_weights(self):
        """COO arrays with parallel edges reduced to their minimum length."""
        best: dict[tuple[int, int], float] = {}
        for ui, vi, length in self._edges:
            if ui == vi:
                continue
            key = (ui, vi) if ui < vi else (vi, ui)
            w = float(length)
            if key not in best or w < best[key]:
                best[key] = w
        rows = np.fromiter((k[0] for k in best), dtype=np.int64, count=len(best))
        cols = np.fromiter((k[1] for k in best), dtype=np.int64, count=len(best))
        vals = np.fromiter(best.values(), dtype=np.float64, count=len(best))
        return rows, cols, vals

    def distance_matrix(self) -> np.ndarray:
        """Dense all-pairs vertex distances (cached after the first call)."""
        if self._matrix is None:
            n = len(self._labels)
            rows, cols, vals = self._min_reduced_weights()
            m = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
            d = _csgraph_dijkstra(m, directed=False)
            if np.isinf(d).any():
                raise UnreachableError("graph is not connected")
            d.setflags(write=False)
            self._matrix = d
        return self._matrix

    def has_exact_lengths(self) -> bool:
        return all(isinstance(length, (int, Fraction)) for _, _, length in self._edges)

    def exact_distance_matrix(self) -> tuple[np.ndarray, int]:
        """All-pairs distances as exact scaled integers.

        Returns (matrix, scale) with matrix[i, j] * scale**-1 the exact
        rational distance.  Requires int/Fraction edge lengths; raises if
        the scaled diameter cannot be represented exactly.
        """
        if self._exact is not None:
            return self._exact
        if not self.has_exact_lengths():
            raise GraphFormatError("exact distances need int or Fraction edge lengths")
        scale = 1
        for _, _, length in self._edges:
            scale = math.lcm(scale, Fraction(length).denominator)
        n = len(self._labels)
        best: dict[tuple[int, int], int] = {}
        for ui, vi, length in self._edges:
            if ui == vi:
                continue
            key = (ui, vi) if ui < vi else (vi, ui)
            w = int(Fraction(length) * scale)
            if key not in best or w < best[key]:
                best[key] = w
        max_w = max(best.values(), default=0)
        if (n - 1) * max_w >= _MAX_EXACT:
            raise OverflowError("scaled path lengths may exceed exact float64 range")
        rows = np.fromiter((k[0] for k in best), dtype=np.int64, count=len(best))
        cols = np.fromiter((k[1] for k in best), dtype=np.int64, count=len(best))
        vals = np.fromiter(best.values(), dtype=np.float64, count=len(best))
        m = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        d = _csgraph_dijkstra(m, directed=False)
        if np.isinf(d).any():
            raise UnreachableError("graph is not connected")
        if d.max(initial=0.0) >= _MAX_EXACT:
            raise OverflowError("scaled distances exceed exact float64 range")
        out = np.round(d).astype(np.int64)
        out.setflags(write=False)
        self._exact = (out, scale)
        return self._exact

    def vertex_distance(self, u, v):
        m = self.distance_matrix()
        return float(m[self.vertex_index(u), self.vertex_index(v)])


def graph_to_json(g: MetricGraph) -> dict:
    """Interchange form {"vertices": [...], "edges": [[u, v, length], ...]}."""
    for lab in g.vertex_labels:
        if not isinstance(lab, str):
            raise GraphFormatError("JSON interchange requires string vertex labels")
    return {
        "vertices": g.vertex_labels,
        "edges": [[u, v, float(length)] for u, v, length in g.edge_list()],
    }


def graph_from_json(obj) -> MetricGraph:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        vertices = obj["vertices"]
        edges = [(u, v, float(length)) for u, v, length in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad graph JSON: {exc}") from exc
    return MetricGraph(vertices, edges)
