"""Tripod witnesses and the degenerate-loop certificate.

A tripod is a near-geodesic through a center together with a third
near-geodesic leg whose far endpoint projects onto the center.  The
abstract model carries the tree metric ``d_mod``; the restriction metric
of the ambient space is sandwiched between ``d_mod`` and an affine
multiple of it.  ``build_lambda`` traces the closed seven-segment family
of degenerate triangles on an equal-legged model and ``check_lambda``
certifies its degeneracy, perimeter floor, winding, and size threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cone
from .cone import SideTriple
from .graphs import MetricGraph, PathWitness, Vertex

__all__ = [
    "ModelTripod",
    "d_mod",
    "GeodesicSegment",
    "GraphPath",
    "TripodWitness",
    "TripodReport",
    "verify_tripod",
    "tripod_from_graph_points",
    "SandwichReport",
    "compare_sandwich",
    "UnverifiedTripodError",
    "build_lambda",
    "LambdaReport",
    "check_lambda",
]


class UnverifiedTripodError(ValueError):
    """The witness failed verification and cannot back further checks."""


@dataclass(frozen=True)
class ModelTripod:
    """Three segments of given lengths glued at a center.

    Points are (leg, s) with s the arc distance from the center.
    """

    legs: tuple[float, float, float]

    def __post_init__(self):
        if len(self.legs) != 3 or any(not (l > 0) for l in self.legs):
            raise ValueError("model tripod needs three positive leg lengths")
        object.__setattr__(self, "legs", tuple(float(l) for l in self.legs))

    def validate_point(self, p) -> None:
        leg, s = p
        if leg not in (1, 2, 3):
            raise ValueError(f"leg index must be 1, 2 or 3, got {leg!r}")
        if not (-1e-12 <= s <= self.legs[leg - 1] + 1e-12):
            raise ValueError(f"offset {s} outside leg {leg} (length {self.legs[leg - 1]})")

    def d_mod(self, p, q) -> float:
        """Tree metric: same-leg |s_p - s_q|, cross-leg s_p + s_q."""
        self.validate_point(p)
        self.validate_point(q)
        (lp, sp), (lq, sq) = p, q
        if lp == lq:
            return abs(sp - sq)
        return sp + sq

    def vertex(self, leg: int):
        return (leg, self.legs[leg - 1])

    @property
    def center(self):
        return (1, 0.0)


def d_mod(tripod: ModelTripod, p, q) -> float:
    return tripod.d_mod(p, q)


# -- paths -------------------------------------------------------------------


class GeodesicSegment:
    """Shortest-path segment in a space with a geodesic parameterization."""

    def __init__(self, space, p, q):
        self.space = space
        self.p = p
        self.q = q
        self.length = space.distance(p, q)

    def point_at(self, t):
        if self.length == 0.0:
            return self.p
        return self.space.geodesic_point(self.p, self.q, min(1.0, max(0.0, t / self.length)))

    def breakpoints(self):
        return [0.0, self.length]

    @property
    def start(self):
        return self.p

    @property
    def end(self):
        return self.q


class GraphPath:
    """A concrete graph path; breakpoints are the vertices it visits."""

    def __init__(self, graph: MetricGraph, witness: PathWitness):
        self.graph = graph
        self.witness = witness
        self.length = float(witness.total_length)

    @classmethod
    def shortest(cls, graph: MetricGraph, p, q):
        return cls(graph, graph.shortest_path(p, q))

    def point_at(self, t):
        return self.graph.normalize(self.witness.point_at(t))

    def breakpoints(self):
        return [float(t) for t in self.witness.breakpoints()]

    @property
    def start(self):
        return self.witness.start

    @property
    def end(self):
        return self.witness.end


@dataclass
class TripodWitness:
    """A tripod candidate: the through-path, its center, and the third leg.

    ``mu`` runs from one tip to the other through the center at arc
    length ``center_t``; ``gamma`` runs from the far point into the
    center.  ``eps`` is the claimed slack for both the near-geodesic and
    the projection conditions.
    """

    space: object
    mu: object
    center_t: float
    gamma: object
    eps: float = 0.0

    @property
    def x(self):
        return self.mu.start

    @property
    def y(self):
        return self.mu.end

    @property
    def z(self):
        return self.gamma.start

    @property
    def center(self):
        return self.mu.point_at(self.center_t)

    @property
    def leg_lengths(self) -> tuple[float, float, float]:
        return (self.center_t, self.mu.length - self.center_t, self.gamma.length)


@dataclass
class TripodReport:
    ok: bool
    measured_r: float
    max_projection_violation: float
    certified_slack: float
    mu_excess: float
    gamma_excess: float
    endpoint_gap: float

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "measured_r": self.measured_r,
            "max_projection_violation": self.max_projection_violation,
            "certified_slack": self.certified_slack,
            "mu_excess": self.mu_excess,
            "gamma_excess": self.gamma_excess,
            "endpoint_gap": self.endpoint_gap,
        }


_TOL = 1e-9


def verify_tripod(w: TripodWitness, h: float) -> TripodReport:
    """Check the witness invariants with the through-path sampled at ``h``.

    Both paths must be eps-near-geodesics, the center must sit on the
    through-path, and the far point must have the center as an eps-nearest
    point among the checked samples.  Sampling certifies the projection
    condition with slack eps + h (distance to a sample moves by at most
    the arc gap); on graph paths every visited vertex is also checked,
    where piecewise linearity makes the vertex check exact.  ``measured_r``
    is the largest leg bound the witness supports.
    """
    if not (h > 0):
        raise ValueError("check resolution h must be positive")
    space = w.space
    if not (0.0 <= w.center_t <= w.mu.length):
        raise ValueError("center position outside the through-path")
    o = w.center
    z = w.z
    endpoint_gap = float(space.distance(w.gamma.end, o))
    mu_excess = w.mu.length - space.distance(w.x, w.y)
    gamma_excess = w.gamma.length - space.distance(z, o)
    dzo = space.distance(z, o)
    positions = set()
    steps = max(1, math.ceil(w.mu.length / h))
    for k in range(steps + 1):
        positions.add(min(w.mu.length, k * w.mu.length / steps))
    positions.update(t for t in w.mu.breakpoints() if 0.0 <= t <= w.mu.length)
    positions.add(w.center_t)
    max_violation = -math.inf
    for t in sorted(positions):
        viol = dzo - space.distance(z, w.mu.point_at(t))
        if viol > max_violation:
            max_violation = viol
    measured_r = min(w.center_t, w.mu.length - w.center_t, w.gamma.length)
    ok = (
        endpoint_gap <= _TOL
        and mu_excess <= w.eps + _TOL
        and gamma_excess <= w.eps + _TOL
        and max_violation <= w.eps + _TOL
    )
    return TripodReport(
        ok=bool(ok),
        measured_r=float(measured_r),
        max_projection_violation=float(max_violation),
        certified_slack=float(w.eps + h),
        mu_excess=float(mu_excess),
        gamma_excess=float(gamma_excess),
        endpoint_gap=float(endpoint_gap),
    )


def tripod_from_graph_points(space, x, y, z) -> TripodWitness:
    """Exact-geodesic witness in a graph space.

    The through-path is a shortest x-y path; the center is the visited
    point nearest to z (ties to the earlier position), and the third leg
    is a shortest path from z into it.  The construction gives eps = 0
    whenever the nearest visited point is a true nearest point of the
    whole path, which holds at vertices by piecewise linearity.
    """
    g = space.graph
    mu = GraphPath.shortest(g, x, y)
    best_t = None
    best_d = None
    for t in mu.breakpoints():
        d = space.distance(z, mu.point_at(t))
        if best_d is None or d < best_d:
            best_t, best_d = t, d
    gamma = GraphPath.shortest(g, z, mu.point_at(best_t))
    return TripodWitness(space=space, mu=mu, center_t=best_t, gamma=gamma, eps=0.0)


# -- model comparison ---------------------------------------------------------


def embedded_point(w: TripodWitness, p):
    """Image in the ambient space of a model point (leg, s)."""
    leg, s = p
    if leg == 1:
        return w.mu.point_at(w.center_t - s)
    if leg == 2:
        return w.mu.point_at(w.center_t + s)
    return w.gamma.point_at(w.gamma.length - s)


def witness_model(w: TripodWitness) -> ModelTripod:
    legs = w.leg_lengths
    if any(l <= 0 for l in legs):
        raise UnverifiedTripodError(f"witness has a zero-length leg: {legs}")
    return ModelTripod(legs)


@dataclass
class SandwichReport:
    ok: bool
    pairs: int
    max_lower_violation: float
    max_upper_violation: float
    max_ratio: float

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "pairs": self.pairs,
            "max_lower_violation": self.max_lower_violation,
            "max_upper_violation": self.max_upper_violation,
            "max_ratio": self.max_ratio,
        }


def compare_sandwich(
    w: TripodWitness,
    samples: int,
    rng: np.random.Generator,
    tol: float = 1e-9,
    report: TripodReport | None = None,
) -> SandwichReport:
    """Sample model point pairs and check d <= d_mod <= 3 d + 6 eps.

    ``w`` must verify first (a report may be passed in to skip the
    re-check).  On trees with eps = 0 the two metrics agree exactly.
    """
    if report is None:
        h = max(min(w.leg_lengths) / 16.0, w.mu.length / 256.0, 1e-9)
        report = verify_tripod(w, h=h)
    if not report.ok:
        raise UnverifiedTripodError("witness failed verification")
    model = witness_model(w)
    max_lower = -math.inf
    max_upper = -math.inf
    max_ratio = 0.0
    for _ in range(samples):
        pts = []
        for _ in range(2):
            leg = int(rng.integers(1, 4))
            s = float(rng.uniform(0.0, model.legs[leg - 1]))
            pts.append((leg, s))
        a, b = pts
        dm = model.d_mod(a, b)
        d = w.space.distance(embedded_point(w, a), embedded_point(w, b))
        max_lower = max(max_lower, d - dm)
        max_upper = max(max_upper, dm - (3.0 * d + 6.0 * w.eps))
        if d > 0:
            max_ratio = max(max_ratio, dm / d)
    ok = max_lower <= tol and max_upper <= tol
    return SandwichReport(
        ok=bool(ok),
        pairs=samples,
        max_lower_violation=float(max_lower),
        max_upper_violation=float(max_upper),
        max_ratio=float(max_ratio),
    )


# -- the seven-segment loop ---------------------------------------------------


def build_lambda(model: ModelTripod, m: int) -> list[tuple]:
    """Closed loop of point triples tracing the degenerate family.

    Requires equal legs (the fourth segment must close back onto the
    first).  Legs 1, 2, 3 carry the tips x, y, z; each of the seven
    segments contributes ``m`` samples and the first triple (x, x, o)
    is repeated at the end, so the loop closes exactly.
    """
    if m < 2:
        raise ValueError("need at least 2 samples per segment")
    r = model.legs[0]
    if any(l != r for l in model.legs):
        raise ValueError("the loop construction needs equal leg lengths")
    o = (1, 0.0)
    x = (1, r)
    y = (2, r)
    z = (3, r)

    def down(leg, s):  # from tip toward center: arc position s in [0, r]
        return (leg, r - s)

    loop: list[tuple] = []
    for k in range(m):
        s = r * k / m
        loop.append((down(1, s), x, o))  # x..o in slot 1
    for k in range(m):
        s = r * k / m
        loop.append(((2, s), x, o))  # o..y in slot 1
    for k in range(m):
        s = r * k / m
        loop.append((y, down(1, s), o))  # x..o in slot 2
    for k in range(m):
        s = r * k / m
        loop.append((y, (2, s), o))  # o..y in slot 2
    for k in range(m):
        s = r * k / m
        loop.append((y, y, (3, s)))  # o..z in slot 3
    for k in range(m):
        s = 2.0 * r * k / m  # y..o..x in slots 1 and 2 (double length)
        w = (2, r - s) if s <= r else (1, s - r)
        loop.append((w, w, z))
    for k in range(m):
        s = r * k / m
        loop.append((x, x, down(3, s)))  # z..o in slot 3
    loop.append((x, x, o))
    return loop


def loop_triples(loop, metric) -> list[SideTriple]:
    """Map each triple of points through a two-point metric."""
    out = []
    for (p1, p2, p3) in loop:
        out.append(SideTriple(metric(p1, p2), metric(p2, p3), metric(p3, p1)))
    return out


@dataclass
class LambdaReport:
    ok: bool
    samples: int
    max_defect: float
    all_degenerate: bool
    min_perimeter: float
    perimeter_bound: float
    winding: int
    threshold_ok: bool
    kappa_ray_clear: bool

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "samples": self.samples,
            "max_defect": self.max_defect,
            "all_degenerate": self.all_degenerate,
            "min_perimeter": self.min_perimeter,
            "perimeter_bound": self.perimeter_bound,
            "winding": self.winding,
            "threshold_ok": self.threshold_ok,
            "kappa_ray_clear": self.kappa_ray_clear,
        }


def check_lambda(
    loop,
    model: ModelTripod,
    eps: float,
    kappa,
    metric: str = "dmod",
    witness: TripodWitness | None = None,
) -> LambdaReport:
    """Certify the loop: degeneracy, perimeter floor, winding, threshold.

    * every sampled triple must be eps-degenerate under the chosen
      metric ("dmod" for the tree metric, "space" for the restriction
      metric of a witness embedding);
    * the minimum perimeter must reach (2/3) R - 4 eps;
    * the winding about the central ray must be odd (it is 1 for the
      canonical loop at any R and sampling density >= 8);
    * the target triple must satisfy R > (9/2) r - 33 eps, with r its
      perimeter, so the loop stays in the perimeter range that forces
      realization; the loop samples must also keep clear of the target's
      normalized ray by half its normalized defect.
    """
    kappa = cone.SideTriple(*kappa) if not isinstance(kappa, SideTriple) else kappa
    kdef = cone.defect(kappa)
    if kdef <= 0:
        raise cone.InvalidTripleError("target triple must be interior (positive defect)")
    if metric == "dmod":
        dist = model.d_mod
    elif metric == "space":
        if witness is None:
            raise ValueError("metric='space' needs a witness embedding")
        space = witness.space
        dist = lambda p, q: space.distance(embedded_point(witness, p), embedded_point(witness, q))
    else:
        raise ValueError("metric must be 'dmod' or 'space'")
    triples = loop_triples(loop, dist)
    defects = [cone.defect(t) for t in triples]
    perims = [t.perimeter for t in triples]
    max_defect = max(defects)
    min_perimeter = min(perims)
    r = model.legs[0]
    bound = (2.0 / 3.0) * r - 4.0 * eps
    winding = cone.winding_number(triples)
    threshold_ok = r > 4.5 * kappa.perimeter - 33.0 * eps
    # Within the normalized slice, an interior triple sits at max-norm
    # distance (defect/perimeter)/2 from the degenerate boundary, so a
    # boundary-supported loop clears its ray by at least that; certify
    # half of it.
    ray_gap = min(cone.simplex_gap(t, kappa) for t in triples)
    kappa_ray_clear = ray_gap >= (kdef / kappa.perimeter) / 4.0
    all_degenerate = max_defect <= eps + 1e-12
    ok = (
        all_degenerate
        and min_perimeter >= bound - _TOL
        and winding % 2 == 1
        and threshold_ok
        and kappa_ray_clear
    )
    return LambdaReport(
        ok=bool(ok),
        samples=len(loop),
        max_defect=float(max_defect),
        all_degenerate=bool(all_degenerate),
        min_perimeter=float(min_perimeter),
        perimeter_bound=float(bound),
        winding=int(winding),
        threshold_ok=bool(threshold_ok),
        kappa_ray_clear=bool(kappa_ray_clear),
    )
