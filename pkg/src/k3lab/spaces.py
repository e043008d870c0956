"""Catalog of model metric spaces behind one distance interface.

Line, half-line, plane, three-legged model tree, the universal cover of
a flat annulus (the "strip"), a truncated infinite cyclic cover graph,
l2 products, and user-supplied weighted graphs.  Every space exposes
``distance``, ``random_point``, point (de)serialization, and - where the
geometry affords it - ``geodesic_point`` for walking along a shortest
path.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graphs import GraphFormatError, MetricGraph, OnEdge, Vertex, graph_from_json, graph_to_json

__all__ = [
    "SpaceMismatchError",
    "LineSpec",
    "HalfLineSpec",
    "PlaneSpec",
    "TripodSpec",
    "StripSpec",
    "CoverSpec",
    "ProductSpec",
    "GraphSpec",
    "build_space",
    "space_spec_from_json",
    "space_spec_to_json",
    "cover_index_set",
    "build_cover_graph",
    "strip_distance",
    "strip_geodesic_point",
]


class SpaceMismatchError(ValueError):
    """A point does not belong to the space it was used with."""


# -- specs --------------------------------------------------------------------


@dataclass(frozen=True)
class LineSpec:
    pass


@dataclass(frozen=True)
class HalfLineSpec:
    pass


@dataclass(frozen=True)
class PlaneSpec:
    pass


@dataclass(frozen=True)
class TripodSpec:
    legs: tuple[float, float, float]

    def __post_init__(self):
        if len(self.legs) != 3 or any(not (l > 0) for l in self.legs):
            raise ValueError("tripod needs three positive leg lengths")
        object.__setattr__(self, "legs", tuple(float(l) for l in self.legs))


@dataclass(frozen=True)
class StripSpec:
    """Universal cover of the flat annulus with radii r1 < r2.

    ``closed`` additionally admits points on the inner boundary r = r1
    (the metric completion); without it the inner boundary is open and
    wrap geodesics are infima that are not attained.
    """

    r1: float
    r2: float
    closed: bool = False

    def __post_init__(self):
        if not (0 < self.r1 < self.r2 < math.inf):
            raise ValueError("strip needs 0 < r1 < r2 < inf")


@dataclass(frozen=True)
class CoverSpec:
    """Truncated cyclic cover graph: levels -n..n, circle indices up to i_max."""

    levels: int
    i_max: int
    index_set: str = "standard"

    def __post_init__(self):
        if self.levels < 1 or self.i_max < 2:
            raise ValueError("cover needs levels >= 1 and i_max >= 2")
        if self.index_set not in ("standard", "no2"):
            raise ValueError("index_set must be 'standard' or 'no2'")


@dataclass(frozen=True)
class ProductSpec:
    first: object
    second: object


@dataclass(frozen=True)
class GraphSpec:
    graph: MetricGraph


# -- strip geometry -----------------------------------------------------------


def _segment_origin_distance(ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(ax, ay)
    t = -(ax * dx + ay * dy) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(ax + t * dx, ay + t * dy)


def strip_distance(p, q, r1: float, r2: float) -> float:
    """Distance in the annulus cover between points (r, theta).

    Angles are unwrapped reals.  Two geodesic candidates exist: the
    straight chord of the developed points (valid when the angle gap is
    below pi and the chord clears the inner disk) and the taut string -
    tangent to the inner circle, a wrap along it, and a tangent out
    (valid when the angle gap exceeds the two tangent angles).  The
    minimum over valid candidates is the infimum of path lengths; the
    wrap value is attained only in the completion.
    """
    ra, ta = p
    rb, tb = q
    for r in (ra, rb):
        if not (r1 <= r <= r2):
            raise SpaceMismatchError(f"radius {r} outside [{r1}, {r2}]")
    dth = abs(ta - tb)
    best = math.inf
    if dth < math.pi:
        ax, ay = ra, 0.0
        bx, by = rb * math.cos(dth), rb * math.sin(dth)
        if _segment_origin_distance(ax, ay, bx, by) >= r1 - 1e-12:
            best = math.hypot(bx - ax, by - ay)
    phi_a = math.acos(min(1.0, r1 / ra))
    phi_b = math.acos(min(1.0, r1 / rb))
    wrap = dth - phi_a - phi_b
    if wrap >= 0.0:
        taut = math.sqrt(max(ra * ra - r1 * r1, 0.0)) + math.sqrt(max(rb * rb - r1 * r1, 0.0)) + r1 * wrap
        best = min(best, taut)
    return best


def _strip_distance_arrays(ra, ta, rb, tb, r1):
    """Vectorized strip distance (radii assumed in range)."""
    ra = np.asarray(ra, dtype=float)
    ta = np.asarray(ta, dtype=float)
    rb = np.asarray(rb, dtype=float)
    tb = np.asarray(tb, dtype=float)
    dth = np.abs(ta - tb)
    ax, ay = ra, np.zeros_like(ra)
    bx, by = rb * np.cos(dth), rb * np.sin(dth)
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    t = np.where(denom > 0.0, -(ax * dx + ay * dy) / np.where(denom > 0.0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    seg = np.hypot(ax + t * dx, ay + t * dy)
    chord_ok = (dth < math.pi) & (seg >= r1 - 1e-12)
    chord = np.hypot(dx, dy)
    phi_a = np.arccos(np.minimum(1.0, r1 / ra))
    phi_b = np.arccos(np.minimum(1.0, r1 / rb))
    wrap = dth - phi_a - phi_b
    taut = np.sqrt(np.maximum(ra * ra - r1 * r1, 0.0)) + np.sqrt(np.maximum(rb * rb - r1 * r1, 0.0)) + r1 * wrap
    out = np.where(chord_ok, chord, np.inf)
    out = np.minimum(out, np.where(wrap >= 0.0, taut, np.inf))
    return out


def strip_geodesic_point(p, q, r1: float, r2: float, frac: float):
    """Point at fraction ``frac`` of arc length along the p-q geodesic.

    For wrap geodesics the middle portion runs along the inner boundary
    r = r1, so interior fractions may return completion points.
    """
    if not 0.0 <= frac <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    ra, ta = p
    rb, tb = q
    total = strip_distance(p, q, r1, r2)
    if total == 0.0:
        return (ra, ta)
    sgn = 1.0 if tb >= ta else -1.0
    dth = abs(ta - tb)
    phi_a = math.acos(min(1.0, r1 / ra))
    phi_b = math.acos(min(1.0, r1 / rb))
    wrap = dth - phi_a - phi_b
    la = math.sqrt(max(ra * ra - r1 * r1, 0.0))
    lb = math.sqrt(max(rb * rb - r1 * r1, 0.0))
    use_chord = False
    if dth < math.pi:
        bx_, by_ = rb * math.cos(dth), rb * math.sin(dth)
        if _segment_origin_distance(ra, 0.0, bx_, by_) >= r1 - 1e-12:
            chord = math.hypot(bx_ - ra, by_)
            if wrap < 0.0 or chord <= la + lb + r1 * wrap:
                use_chord = True
    s = frac * total
    if use_chord:
        ax, ay = ra * math.cos(ta), ra * math.sin(ta)
        bx, by = rb * math.cos(tb), rb * math.sin(tb)
        u = s / total
        px, py = ax + u * (bx - ax), ay + u * (by - ay)
        r = math.hypot(px, py)
        theta = math.atan2(py, px)
        # unwrap onto the [ta, tb] window
        mid = 0.5 * (ta + tb)
        while theta < mid - math.pi:
            theta += 2.0 * math.pi
        while theta > mid + math.pi:
            theta -= 2.0 * math.pi
        return (min(r, r2), theta)
    # taut string: tangent in, wrap, tangent out
    if s <= la and la > 0.0:
        tax = r1 * math.cos(ta + sgn * phi_a)
        tay = r1 * math.sin(ta + sgn * phi_a)
        ax, ay = ra * math.cos(ta), ra * math.sin(ta)
        u = s / la
        px, py = ax + u * (tax - ax), ay + u * (tay - ay)
        r = math.hypot(px, py)
        theta = math.atan2(py, px)
        while theta < ta - math.pi:
            theta += 2.0 * math.pi
        while theta > ta + math.pi:
            theta -= 2.0 * math.pi
        return (min(max(r, r1), r2), theta)
    if s >= total - lb and lb > 0.0:
        srem = total - s
        tbx = r1 * math.cos(tb - sgn * phi_b)
        tby = r1 * math.sin(tb - sgn * phi_b)
        bx, by = rb * math.cos(tb), rb * math.sin(tb)
        u = srem / lb
        px, py = bx + u * (tbx - bx), by + u * (tby - by)
        r = math.hypot(px, py)
        theta = math.atan2(py, px)
        while theta < tb - math.pi:
            theta += 2.0 * math.pi
        while theta > tb + math.pi:
            theta -= 2.0 * math.pi
        return (min(max(r, r1), r2), theta)
    # on the inner circle
    ang = (s - la) / r1
    return (r1, ta + sgn * (phi_a + ang))


# -- cover graph --------------------------------------------------------------


def cover_index_set(i_max: int, convention: str = "standard") -> tuple[int, ...]:
    """Circle indices for the cover: {2..i_max}, or {1, 3..i_max} ('no2')."""
    if convention == "standard":
        return tuple(range(2, i_max + 1))
    if convention == "no2":
        return (1,) + tuple(range(3, i_max + 1))
    raise ValueError("convention must be 'standard' or 'no2'")


def build_cover_graph(levels: int, i_max: int, convention: str = "standard", exact: bool = False) -> MetricGraph:
    """Truncated cyclic cover of the bouquet-with-chords graph.

    Level vertices ``a:n`` for n in [-levels, levels]; midpoint vertices
    ``b:i:n`` for each circle index i and the same level range.  Edges:

    * ``a:n`` -- ``b:i:n`` of length (1 + 1/i)/2 (first half-arc), and
      ``b:i:n`` -- ``a:n+1`` of the same length (second half-arc, one
      level up);
    * chords ``b:i:n`` -- ``b:j:n+1`` of length 1/2 + (1/i + 1/j)/4 for
      every ordered index pair (i, j), including i = j.

    Edges whose upper endpoint would fall outside the level window are
    dropped.  With ``exact`` the lengths are Fractions.
    """
    idx = cover_index_set(i_max, convention)
    one = Fraction(1) if exact else 1.0

    def half_arc(i):
        return (one + one / i) / 2

    def chord(i, j):
        return one / 2 + (one / i + one / j) / 4

    vertices = [f"a:{n}" for n in range(-levels, levels + 1)]
    vertices += [f"b:{i}:{n}" for n in range(-levels, levels + 1) for i in idx]
    edges = []
    for n in range(-levels, levels + 1):
        for i in idx:
            edges.append((f"a:{n}", f"b:{i}:{n}", half_arc(i)))
    for n in range(-levels, levels):
        for i in idx:
            edges.append((f"b:{i}:{n}", f"a:{n + 1}", half_arc(i)))
    for n in range(-levels, levels):
        for i in idx:
            for j in idx:
                edges.append((f"b:{i}:{n}", f"b:{j}:{n + 1}", chord(i, j)))
    return MetricGraph(vertices, edges)


# -- spaces -------------------------------------------------------------------


class Space:
    """Common interface; concrete spaces override the point-level methods."""

    kind = "space"

    def __init__(self, spec):
        self.spec = spec

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def validate_point(self, p) -> None:
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator, bounds: float):
        raise NotImplementedError

    def geodesic_point(self, p, q, frac: float):
        raise NotImplementedError(f"{self.kind} has no geodesic parameterization")

    def perturb_candidates(self, p, step: float, rng: np.random.Generator) -> list:
        raise NotImplementedError

    def metadata(self) -> dict:
        return {"kind": self.kind}

    def serialize_point(self, p) -> str:
        raise NotImplementedError

    def parse_point(self, s: str):
        raise NotImplementedError


def _f17(x) -> str:
    return format(float(x), ".17g")


class LineSpace(Space):
    kind = "line"

    def validate_point(self, p):
        if not isinstance(p, (int, float)) or not math.isfinite(p):
            raise SpaceMismatchError(f"line point must be a finite real, got {p!r}")

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return abs(float(p) - float(q))

    def random_point(self, rng, bounds):
        return float(rng.uniform(-bounds, bounds))

    def geodesic_point(self, p, q, frac):
        return float(p) + frac * (float(q) - float(p))

    def perturb_candidates(self, p, step, rng):
        return [float(p) - step, float(p) + step]

    def serialize_point(self, p):
        return _f17(p)

    def parse_point(self, s):
        return float(s)


class HalfLineSpace(Space):
    kind = "halfline"

    def validate_point(self, p):
        if not isinstance(p, (int, float)) or not math.isfinite(p) or p < 0:
            raise SpaceMismatchError(f"half-line point must be a real >= 0, got {p!r}")

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return abs(float(p) - float(q))

    def random_point(self, rng, bounds):
        return float(rng.uniform(0.0, bounds))

    def geodesic_point(self, p, q, frac):
        return float(p) + frac * (float(q) - float(p))

    def perturb_candidates(self, p, step, rng):
        out = [float(p) + step]
        if float(p) - step >= 0.0:
            out.append(float(p) - step)
        return out

    def serialize_point(self, p):
        return _f17(p)

    def parse_point(self, s):
        return float(s)


class PlaneSpace(Space):
    kind = "plane"

    def validate_point(self, p):
        if not (isinstance(p, tuple) and len(p) == 2 and all(math.isfinite(v) for v in p)):
            raise SpaceMismatchError(f"plane point must be an (x, y) tuple, got {p!r}")

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def random_point(self, rng, bounds):
        return (float(rng.uniform(-bounds, bounds)), float(rng.uniform(-bounds, bounds)))

    def geodesic_point(self, p, q, frac):
        return (p[0] + frac * (q[0] - p[0]), p[1] + frac * (q[1] - p[1]))

    def perturb_candidates(self, p, step, rng):
        x, y = p
        return [(x - step, y), (x + step, y), (x, y - step), (x, y + step)]

    def serialize_point(self, p):
        return f"{_f17(p[0])};{_f17(p[1])}"

    def parse_point(self, s):
        x, y = s.split(";")
        return (float(x), float(y))


class TripodSpace(Space):
    """Three segments glued at a common center; tree metric.

    Points are (leg, s) with leg in {1, 2, 3} and s the arc distance
    from the center, s in [0, leg length].
    """

    kind = "tripod"

    def __init__(self, spec: TripodSpec):
        super().__init__(spec)
        self.legs = spec.legs

    def validate_point(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise SpaceMismatchError(f"tripod point must be (leg, s), got {p!r}")
        leg, s = p
        if leg not in (1, 2, 3):
            raise SpaceMismatchError(f"leg index must be 1, 2 or 3, got {leg!r}")
        if not (0.0 <= s <= self.legs[leg - 1] + 1e-12):
            raise SpaceMismatchError(f"offset {s} outside leg {leg} of length {self.legs[leg - 1]}")

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        (lp, sp), (lq, sq) = p, q
        if lp == lq:
            return abs(float(sp) - float(sq))
        return float(sp + sq)

    def random_point(self, rng, bounds):
        caps = [min(l, bounds) for l in self.legs]
        total = sum(caps)
        u = float(rng.uniform(0.0, total))
        for leg, cap in enumerate(caps, start=1):
            if u <= cap or leg == 3:
                return (leg, min(u, cap))
            u -= cap
        raise AssertionError

    def geodesic_point(self, p, q, frac):
        (lp, sp), (lq, sq) = p, q
        if lp == lq:
            return (lp, sp + (sq - sp) * frac)
        s = frac * (sp + sq)
        if s <= sp:
            return (lp, sp - s)
        return (lq, s - sp)

    def perturb_candidates(self, p, step, rng):
        leg, s = p
        out = []
        if s + step <= self.legs[leg - 1]:
            out.append((leg, s + step))
        if s - step >= 0.0:
            out.append((leg, s - step))
        else:
            spill = step - s
            for other in (1, 2, 3):
                if other != leg and spill <= self.legs[other - 1]:
                    out.append((other, spill))
        return out

    def metadata(self):
        return {"kind": self.kind, "legs": list(self.legs)}

    def serialize_point(self, p):
        return f"leg{p[0]};{_f17(p[1])}"

    def parse_point(self, s):
        leg, off = s.split(";")
        return (int(leg.removeprefix("leg")), float(off))


class StripSpace(Space):
    """Universal cover of a flat annulus; points are (r, theta) unwrapped."""

    kind = "strip"

    def __init__(self, spec: StripSpec):
        super().__init__(spec)
        self.r1 = spec.r1
        self.r2 = spec.r2
        self.closed = spec.closed

    @property
    def d0(self) -> float:
        """Length bound for the tangent pieces of wrap geodesics."""
        return math.sqrt(self.r2 * self.r2 - self.r1 * self.r1)

    def validate_point(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise SpaceMismatchError(f"strip point must be (r, theta), got {p!r}")
        r, theta = p
        if not math.isfinite(theta):
            raise SpaceMismatchError("theta must be finite")
        lo_ok = (r >= self.r1) if self.closed else (r > self.r1)
        if not (lo_ok and r <= self.r2):
            bracket = "[" if self.closed else "("
            raise SpaceMismatchError(f"radius {r} outside {bracket}{self.r1}, {self.r2}]")

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return strip_distance(p, q, self.r1, self.r2)

    def random_point(self, rng, bounds):
        while True:
            r = float(rng.uniform(self.r1, self.r2))
            if self.closed or r > self.r1:
                break
        theta = float(rng.uniform(-bounds, bounds))
        return (r, theta)

    def geodesic_point(self, p, q, frac):
        return strip_geodesic_point(p, q, self.r1, self.r2, frac)

    def perturb_candidates(self, p, step, rng):
        r, theta = p
        out = [(r, theta - step / r), (r, theta + step / r)]
        if r + step <= self.r2:
            out.append((r + step, theta))
        lo_ok = (r - step >= self.r1) if self.closed else (r - step > self.r1)
        if lo_ok:
            out.append((r - step, theta))
        return out

    def metadata(self):
        return {
            "kind": self.kind,
            "r1": self.r1,
            "r2": self.r2,
            "closed": self.closed,
            "d0": self.d0,
        }

    def serialize_point(self, p):
        return f"{_f17(p[0])};{_f17(p[1])}"

    def parse_point(self, s):
        r, theta = s.split(";")
        return (float(r), float(theta))


class GraphSpace(Space):
    """A finite metric graph as a space; points are graph points."""

    kind = "graph"

    def __init__(self, spec: GraphSpec):
        super().__init__(spec)
        self.graph = spec.graph

    def validate_point(self, p):
        if not isinstance(p, (Vertex, OnEdge)):
            raise SpaceMismatchError(f"graph point expected, got {p!r}")
        self.graph.normalize(p)

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        self.graph.distance_matrix()
        return float(self.graph.distance(p, q))

    def random_point(self, rng, bounds):
        lengths = np.array([float(self.graph.edge_info(e)[2]) for e in range(self.graph.edge_count)])
        if len(lengths) == 0:
            return Vertex(self.graph.vertex_labels[int(rng.integers(self.graph.vertex_count))])
        probs = lengths / lengths.sum()
        eid = int(rng.choice(len(lengths), p=probs))
        off = float(rng.uniform(0.0, lengths[eid]))
        return self.graph.normalize(OnEdge(eid, off))

    def geodesic_point(self, p, q, frac):
        w = self.graph.shortest_path(p, q)
        return self.graph.normalize(w.point_at(frac * w.total_length))

    def perturb_candidates(self, p, step, rng):
        g = self.graph
        p = g.normalize(p)
        out = []
        if isinstance(p, OnEdge):
            _, _, length = g.edge_info(p.edge)
            out.append(g.normalize(OnEdge(p.edge, min(length, p.offset + step))))
            out.append(g.normalize(OnEdge(p.edge, max(0.0, p.offset - step))))
        else:
            vi = g.vertex_index(p.label)
            for nbr, length, eid in g._adj[vi]:
                ui, _, _ = g._edges[eid]
                off = min(step, float(length))
                out.append(g.normalize(OnEdge(eid, off if ui == vi else float(length) - off)))
        return out

    def metadata(self):
        return {
            "kind": self.kind,
            "vertices": self.graph.vertex_count,
            "edges": self.graph.edge_count,
        }

    def serialize_point(self, p):
        p = self.graph.normalize(p)
        if isinstance(p, Vertex):
            return f"v;{p.label}"
        return f"e;{p.edge};{_f17(p.offset)}"

    def parse_point(self, s):
        parts = s.split(";")
        if parts[0] == "v":
            return Vertex(";".join(parts[1:]))
        if parts[0] == "e":
            return OnEdge(int(parts[1]), float(parts[2]))
        raise SpaceMismatchError(f"bad graph point text {s!r}")


class CoverSpace(GraphSpace):
    """The truncated cyclic cover with labeled access to its vertices."""

    kind = "cover"

    def __init__(self, spec: CoverSpec):
        graph = build_cover_graph(spec.levels, spec.i_max, spec.index_set)
        super().__init__(GraphSpec(graph))
        self.spec = spec
        self.levels = spec.levels
        self.i_max = spec.i_max
        self.index_set = cover_index_set(spec.i_max, spec.index_set)
        self._exact_graph = None

    def a(self, n: int) -> Vertex:
        return Vertex(f"a:{n}")

    def b(self, i: int, n: int) -> Vertex:
        return Vertex(f"b:{i}:{n}")

    def exact_graph(self) -> MetricGraph:
        """The same graph with Fraction edge lengths (built on demand)."""
        if self._exact_graph is None:
            self._exact_graph = build_cover_graph(
                self.spec.levels, self.spec.i_max, self.spec.index_set, exact=True
            )
        return self._exact_graph

    def translate_label(self, label: str, shift: int) -> str | None:
        """Label moved ``shift`` levels up, or None if it leaves the window."""
        parts = label.split(":")
        if parts[0] == "a":
            n = int(parts[1]) + shift
            return f"a:{n}" if -self.levels <= n <= self.levels else None
        i, n = int(parts[1]), int(parts[2]) + shift
        return f"b:{i}:{n}" if -self.levels <= n <= self.levels else None

    def metadata(self):
        return {
            "kind": self.kind,
            "levels": self.levels,
            "i_max": self.i_max,
            "index_set": list(self.index_set),
            "vertices": self.graph.vertex_count,
            "edges": self.graph.edge_count,
        }


class ProductSpace(Space):
    """l2 product: d((x1,y1),(x2,y2))^2 = d(x1,x2)^2 + d(y1,y2)^2."""

    kind = "product"

    def __init__(self, spec: ProductSpec, first: Space, second: Space):
        super().__init__(spec)
        self.first = first
        self.second = second

    def validate_point(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise SpaceMismatchError(f"product point must be a pair, got {p!r}")
        self.first.validate_point(p[0])
        self.second.validate_point(p[1])

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return math.hypot(self.first.distance(p[0], q[0]), self.second.distance(p[1], q[1]))

    def random_point(self, rng, bounds):
        return (self.first.random_point(rng, bounds), self.second.random_point(rng, bounds))

    def geodesic_point(self, p, q, frac):
        return (self.first.geodesic_point(p[0], q[0], frac), self.second.geodesic_point(p[1], q[1], frac))

    def perturb_candidates(self, p, step, rng):
        out = [(c, p[1]) for c in self.first.perturb_candidates(p[0], step, rng)]
        out += [(p[0], c) for c in self.second.perturb_candidates(p[1], step, rng)]
        return out

    def metadata(self):
        return {"kind": self.kind, "first": self.first.metadata(), "second": self.second.metadata()}

    def serialize_point(self, p):
        return f"({self.first.serialize_point(p[0])})|({self.second.serialize_point(p[1])})"

    def parse_point(self, s):
        if not (s.startswith("(") and s.endswith(")")):
            raise SpaceMismatchError(f"bad product point text {s!r}")
        # the separator is ambiguous when factors nest; try splits left to right
        for match in re.finditer(r"\)\|\(", s):
            left = s[1 : match.start()]
            right = s[match.end() : -1]
            try:
                return (self.first.parse_point(left), self.second.parse_point(right))
            except (ValueError, SpaceMismatchError):
                continue
        raise SpaceMismatchError(f"bad product point text {s!r}")


def build_space(spec) -> Space:
    """Materialize a space from its spec."""
    if isinstance(spec, LineSpec):
        return LineSpace(spec)
    if isinstance(spec, HalfLineSpec):
        return HalfLineSpace(spec)
    if isinstance(spec, PlaneSpec):
        return PlaneSpace(spec)
    if isinstance(spec, TripodSpec):
        return TripodSpace(spec)
    if isinstance(spec, StripSpec):
        return StripSpace(spec)
    if isinstance(spec, CoverSpec):
        return CoverSpace(spec)
    if isinstance(spec, GraphSpec):
        return GraphSpace(spec)
    if isinstance(spec, ProductSpec):
        return ProductSpace(spec, build_space(spec.first), build_space(spec.second))
    raise TypeError(f"not a space spec: {spec!r}")


# -- JSON spec interchange ----------------------------------------------------


def space_spec_from_json(obj):
    """Parse {"type": ...} JSON into a spec; accepts a JSON string too."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    t = obj.get("type")
    if t == "line":
        return LineSpec()
    if t == "halfline":
        return HalfLineSpec()
    if t == "plane":
        return PlaneSpec()
    if t == "tripod":
        return TripodSpec(tuple(obj["legs"]))
    if t == "strip":
        return StripSpec(float(obj["r1"]), float(obj["r2"]), bool(obj.get("closed", False)))
    if t == "cover":
        return CoverSpec(int(obj["levels"]), int(obj["i_max"]), obj.get("index_set", "standard"))
    if t == "product":
        f, s = obj["factors"]
        return ProductSpec(space_spec_from_json(f), space_spec_from_json(s))
    if t == "graph":
        return GraphSpec(graph_from_json(obj["graph"]))
    raise GraphFormatError(f"unknown space type {t!r}")


def space_spec_to_json(spec) -> dict:
    if isinstance(spec, LineSpec):
        return {"type": "line"}
    if isinstance(spec, HalfLineSpec):
        return {"type": "halfline"}
    if isinstance(spec, PlaneSpec):
        return {"type": "plane"}
    if isinstance(spec, TripodSpec):
        return {"type": "tripod", "legs": list(spec.legs)}
    if isinstance(spec, StripSpec):
        return {"type": "strip", "r1": spec.r1, "r2": spec.r2, "closed": spec.closed}
    if isinstance(spec, CoverSpec):
        return {"type": "cover", "levels": spec.levels, "i_max": spec.i_max, "index_set": spec.index_set}
    if isinstance(spec, ProductSpec):
        return {"type": "product", "factors": [space_spec_to_json(spec.first), space_spec_to_json(spec.second)]}
    if isinstance(spec, GraphSpec):
        return {"type": "graph", "graph": graph_to_json(spec.graph)}
    raise TypeError(f"not a space spec: {spec!r}")
