"""Sampling the realized side-length triples of a space, realizing
target triples, and certifying side bounds for degenerate triangles.

Realization uses constructive placements where the geometry affords one
(plane, line, model tree) and otherwise a multi-start derivative-free
search over point triples.  Certification is exhaustive over vertex
triples on graph spaces (dense distance matrix, vectorized scan) and
sampling-plus-refinement elsewhere; a not-found or counterexample-free
outcome on a continuum space is evidence, not proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cone
from .cone import SideTriple
from .graphs import Vertex
from .spaces import (
    GraphSpace,
    HalfLineSpace,
    LineSpace,
    PlaneSpace,
    Space,
    SpaceMismatchError,
    TripodSpace,
)

__all__ = [
    "TriangleRecord",
    "sample_k3",
    "sample_near_degenerate",
    "RealizeResult",
    "realize",
    "CertReport",
    "certify_degenerate_bound",
    "min_defect_search",
]


@dataclass(frozen=True)
class TriangleRecord:
    """Three points with their measured side triple and defect."""

    points: tuple
    triple: SideTriple
    defect: float

    @classmethod
    def measure(cls, space: Space, x, y, z) -> "TriangleRecord":
        t = SideTriple(space.distance(x, y), space.distance(y, z), space.distance(z, x))
        return cls(points=(x, y, z), triple=t, defect=cone.defect(t))

    def reverify(self, space: Space, tol: float = 1e-12) -> bool:
        """Recompute the sides from the stored points and compare."""
        x, y, z = self.points
        fresh = (space.distance(x, y), space.distance(y, z), space.distance(z, x))
        stored = self.triple.as_tuple()
        return all(abs(a - b) <= tol for a, b in zip(fresh, stored))

    def to_json(self, space: Space) -> dict:
        return {
            "triple": list(self.triple.as_tuple()),
            "defect": self.defect,
            "points": [space.serialize_point(p) for p in self.points],
        }


def sample_k3(space: Space, n: int, bounds: float, rng: np.random.Generator) -> list[TriangleRecord]:
    """Measure ``n`` random point triples; deterministic per seed."""
    if n < 1:
        raise ValueError("need n >= 1 samples")
    out = []
    for _ in range(n):
        x = space.random_point(rng, bounds)
        y = space.random_point(rng, bounds)
        z = space.random_point(rng, bounds)
        out.append(TriangleRecord.measure(space, x, y, z))
    return out


# -- realization --------------------------------------------------------------


@dataclass
class RealizeResult:
    found: bool
    record: TriangleRecord | None
    residual: float
    evaluations: int
    restarts_used: int
    method: str

    def to_json(self, space: Space) -> dict:
        out = {
            "found": self.found,
            "residual": self.residual,
            "evaluations": self.evaluations,
            "restarts_used": self.restarts_used,
            "method": self.method,
        }
        if self.record is not None:
            out["record"] = self.record.to_json(space)
        return out


def _realize_line(space, kappa: SideTriple, tol: float):
    """Collinear placement; exists exactly when the defect vanishes."""
    if cone.defect(kappa) > tol:
        return None
    a, b, c = kappa.as_tuple()
    if b >= a and b >= c:
        pts = (a, 0.0, b)
    else:
        pts = (0.0, a, c)
    return TriangleRecord.measure(space, *pts)


def _realize_plane(space, kappa: SideTriple):
    a, b, c = kappa.as_tuple()
    if a == 0.0:
        x = (0.0, 0.0)
        y = (0.0, 0.0)
        z = (b, 0.0)
        return TriangleRecord.measure(space, x, y, z)
    u = (a * a + c * c - b * b) / (2.0 * a)
    v = math.sqrt(max(c * c - u * u, 0.0))
    return TriangleRecord.measure(space, (0.0, 0.0), (a, 0.0), (u, v))


def _realize_tripod(space, kappa: SideTriple):
    """Place the triple at center offsets p, q, r when they fit the legs."""
    a, b, c = kappa.as_tuple()
    p = (a - b + c) / 2.0
    q = (a + b - c) / 2.0
    r = (-a + b + c) / 2.0
    offs = (p, q, r)
    legs = space.legs
    # assign offsets to distinct legs: sort both, largest offset to longest leg
    order = sorted(range(3), key=lambda i: offs[i])
    leg_order = sorted(range(3), key=lambda i: legs[i])
    assign = {}
    for oi, li in zip(order, leg_order):
        if offs[oi] > legs[li]:
            return None
        assign[oi] = li + 1
    x = (assign[0], p)
    y = (assign[1], q)
    z = (assign[2], r)
    return TriangleRecord.measure(space, x, y, z)


def _search_objective(space, kappa: SideTriple, pts):
    t = SideTriple(
        space.distance(pts[0], pts[1]),
        space.distance(pts[1], pts[2]),
        space.distance(pts[2], pts[0]),
    )
    return t.max_norm_distance(kappa)


def realize(
    space: Space,
    kappa,
    tol: float = 1e-9,
    budget: int = 100_000,
    restarts: int = 32,
    rng: np.random.Generator | None = None,
    bounds: float | None = None,
) -> RealizeResult:
    """Find points whose side triple matches ``kappa`` within ``tol``.

    Constructive fast paths: plane (law-of-cosines placement), line and
    half-line (collinear, only for boundary triples), model tree (center
    offsets).  Everything else - and constructive misses - falls through
    to multi-start local search with shrinking steps.  A not-found
    outcome exhausts the budget and is reported with the best residual;
    it is not a proof of non-membership.
    """
    kappa = kappa if isinstance(kappa, SideTriple) else SideTriple(*kappa)
    if cone.defect(kappa) < 0.0:
        raise cone.InvalidTripleError(f"{kappa.as_tuple()} is outside the cone")
    if isinstance(space, PlaneSpace):
        rec = _realize_plane(space, kappa)
        return RealizeResult(True, rec, rec.triple.max_norm_distance(kappa), 1, 0, "constructive")
    if isinstance(space, (LineSpace, HalfLineSpace)):
        rec = _realize_line(space, kappa, tol)
        if rec is not None:
            return RealizeResult(True, rec, rec.triple.max_norm_distance(kappa), 1, 0, "constructive")
    if isinstance(space, TripodSpace):
        rec = _realize_tripod(space, kappa)
        if rec is not None:
            return RealizeResult(True, rec, rec.triple.max_norm_distance(kappa), 1, 0, "constructive")
    if rng is None:
        rng = np.random.default_rng(0)
    if bounds is None:
        bounds = max(kappa.perimeter, 1.0)
    evals = 0
    best_pts = None
    best_res = math.inf
    used = 0
    for restart in range(restarts):
        if evals >= budget:
            break
        used = restart + 1
        pts = [space.random_point(rng, bounds) for _ in range(3)]
        res = _search_objective(space, kappa, pts)
        evals += 1
        step = bounds / 4.0
        while evals < budget and res > tol and step > tol / 8.0:
            improved = False
            for i in range(3):
                for cand in space.perturb_candidates(pts[i], step, rng):
                    trial = list(pts)
                    trial[i] = cand
                    r = _search_objective(space, kappa, trial)
                    evals += 1
                    if r < res:
                        pts, res = trial, r
                        improved = True
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
            if not improved:
                step *= 0.5
        if res < best_res:
            best_res = res
            best_pts = pts
        if best_res <= tol:
            break
    if best_pts is not None and best_res <= tol:
        rec = TriangleRecord.measure(space, *best_pts)
        return RealizeResult(True, rec, best_res, evals, used, "search")
    return RealizeResult(False, None, best_res, evals, used, "search")


# -- certification ------------------------------------------------------------


@dataclass
class CertReport:
    space_id: dict
    mode: str
    threshold: float
    tol: float
    plan: dict
    counterexamples: list = field(default_factory=list)
    max_min_side: float = 0.0
    empirical_degeneracy: float = 0.0
    min_defect_found: float = math.inf

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self, space: Space | None = None) -> dict:
        ce = [r.to_json(space) if space is not None else list(r.triple.as_tuple()) for r in self.counterexamples]
        return {
            "space": self.space_id,
            "mode": self.mode,
            "threshold": self.threshold,
            "tol": self.tol,
            "plan": self.plan,
            "counterexample_count": len(self.counterexamples),
            "counterexamples": ce,
            "max_min_side": self.max_min_side,
            "empirical_degeneracy": self.empirical_degeneracy,
            "min_defect_found": None if math.isinf(self.min_defect_found) else self.min_defect_found,
            "ok": self.ok,
        }


def _vertex_scan(dm, threshold, tol, centers):
    """Scan ordered (x, v, y) triples for additivity through the center.

    Returns (counterexample index triples, max min-side among additive
    triples, max triple defect seen).
    """
    hits = []
    max_min_side = 0.0
    max_defect = 0.0
    n = dm.shape[0]
    for v in centers:
        dv = dm[v]
        via = dv[:, None] + dv[None, :]
        direct = dm
        gap = via - direct
        additive = gap <= tol
        min_side = np.minimum(dv[:, None], np.broadcast_to(dv[None, :], (n, n)))
        if additive.any():
            mms = float(min_side[additive].max())
            if mms > max_min_side:
                max_min_side = mms
        # triple defect = perimeter - 2 max over (d(x,v), d(v,y), d(x,y))
        tri_max = np.maximum(np.maximum(dv[:, None], dv[None, :]), direct)
        tri_def = (dv[:, None] + dv[None, :] + direct) - 2.0 * tri_max
        md = float(tri_def.max())
        if md > max_defect:
            max_defect = md
        bad = additive & (min_side > threshold)
        if bad.any():
            xs, ys = np.nonzero(bad)
            hits.extend((int(x), int(v), int(y)) for x, y in zip(xs, ys))
    return hits, max_min_side, max_defect


def _certify_vertices(space: GraphSpace, threshold: float, tol: float, threads: int) -> tuple:
    g = space.graph
    if hasattr(space, "exact_graph"):
        g = space.exact_graph()
    if g.has_exact_lengths():
        mat, scale = g.exact_distance_matrix()
        dm = mat.astype(np.float64)
        thr = threshold * scale
        tl = tol * scale
        unscale = 1.0 / scale
    else:
        dm = np.asarray(g.distance_matrix(), dtype=np.float64)
        thr, tl, unscale = threshold, tol, 1.0
    n = dm.shape[0]
    centers = list(range(n))
    if threads > 1:
        chunks = [centers[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda ch: _vertex_scan(dm, thr, tl, ch), chunks))
        hits = sorted(h for p in parts for h in p[0])
        max_min_side = max(p[1] for p in parts)
        max_defect = max(p[2] for p in parts)
    else:
        hits, max_min_side, max_defect = _vertex_scan(dm, thr, tl, centers)
        hits.sort()
    labels = g.vertex_labels
    records = []
    for x, v, y in hits:
        rec = TriangleRecord.measure(space, Vertex(labels[x]), Vertex(labels[v]), Vertex(labels[y]))
        records.append(rec)
    return records, max_min_side * unscale, max_defect * unscale, n


def sample_near_degenerate(
    space: Space,
    n: int,
    rng: np.random.Generator,
    bounds: float,
    max_tries: int = 64,
) -> list[TriangleRecord]:
    """Exactly-degenerate triples built on geodesics: z between x and y.

    Draws endpoint pairs and places the third point at a random fraction
    of the connecting geodesic, rejecting fractions whose point leaves
    the space (e.g. wrap portions on an open strip, in either factor of
    a product).  The resulting triples are degenerate up to float noise.
    """
    out: list[TriangleRecord] = []
    attempts = 0
    limit = 50 * n + 1000
    while len(out) < n:
        attempts += 1
        if attempts > limit:
            raise RuntimeError("could not sample enough geodesic triples; widen the bounds")
        x = space.random_point(rng, bounds)
        y = space.random_point(rng, bounds)
        for _ in range(max_tries):
            frac = float(rng.uniform(0.0, 1.0))
            z = space.geodesic_point(x, y, frac)
            try:
                space.validate_point(z)
            except SpaceMismatchError:
                continue
            out.append(TriangleRecord.measure(space, x, y, z))
            break
    return out


def min_defect_search(
    space: Space,
    side_floor: float,
    restarts: int,
    rng: np.random.Generator,
    bounds: float,
    refine_top: int = 0,
    refine_budget: int = 200,
    step_floor: float = 0.01,
):
    """Search for low-defect triples with all sides above ``side_floor``.

    Random multi-restart sampling, optionally followed by bounded local
    refinement of the best candidates (defect descent, rejecting moves
    that break the side constraint; the step never shrinks below
    ``step_floor``, which bounds how hard the refiner can squeeze).
    Returns (min defect found, best triple points, qualifying count).
    """
    best: list[tuple[float, int, tuple]] = []
    qualifying = 0
    counter = 0
    for _ in range(restarts):
        x = space.random_point(rng, bounds)
        y = space.random_point(rng, bounds)
        z = space.random_point(rng, bounds)
        t = SideTriple(space.distance(x, y), space.distance(y, z), space.distance(z, x))
        if min(t.as_tuple()) < side_floor:
            continue
        qualifying += 1
        d = cone.defect(t)
        counter += 1
        if refine_top > 0:
            if len(best) < refine_top:
                best.append((d, counter, (x, y, z)))
                best.sort()
            elif d < best[-1][0]:
                best[-1] = (d, counter, (x, y, z))
                best.sort()
        else:
            if not best or d < best[0][0]:
                best = [(d, counter, (x, y, z))]
    if not best:
        return math.inf, None, 0
    if refine_top > 0:
        refined = []
        for d0, _, pts in best:
            pts = list(pts)
            d = d0
            step = 0.1
            evals = 0
            while evals < refine_budget and step >= step_floor:
                improved = False
                for i in range(3):
                    for cand in space.perturb_candidates(pts[i], step, rng):
                        trial = list(pts)
                        trial[i] = cand
                        t = SideTriple(
                            space.distance(trial[0], trial[1]),
                            space.distance(trial[1], trial[2]),
                            space.distance(trial[2], trial[0]),
                        )
                        evals += 1
                        if min(t.as_tuple()) < side_floor:
                            continue
                        td = cone.defect(t)
                        if td < d:
                            pts, d = trial, td
                            improved = True
                        if evals >= refine_budget:
                            break
                    if evals >= refine_budget:
                        break
                if not improved:
                    step *= 0.5
            refined.append((d, tuple(pts)))
        refined.sort(key=lambda e: e[0])
        return refined[0][0], refined[0][1], qualifying
    d, _, pts = best[0]
    return d, pts, qualifying


def certify_degenerate_bound(
    space: Space,
    mode: str,
    threshold: float,
    tol: float,
    h: float | None = None,
    samples: int = 10_000,
    rng: np.random.Generator | None = None,
    bounds: float = 10.0,
    threads: int = 1,
    refine_top: int = 20,
    step_floor: float = 0.01,
) -> CertReport:
    """Look for degenerate triangles whose two center legs both exceed
    ``threshold``.

    ``vertex`` mode enumerates all ordered vertex triples of a graph
    space against the dense distance matrix: a counterexample is a
    center v with |d(x,v) + d(v,y) - d(x,y)| <= tol and both legs above
    the threshold.  ``sampled`` mode draws random triples (plus grid
    points on graphs), checks every center choice, and refines the
    lowest-defect candidates under the side constraint.  Reported
    counterexamples re-verify from their raw points.
    """
    plan: dict = {"samples": samples}
    if mode == "vertex":
        if not isinstance(space, GraphSpace):
            raise SpaceMismatchError("vertex-exhaustive certification needs a graph space")
        records, max_min_side, max_defect, n = _certify_vertices(space, threshold, tol, threads)
        plan = {"vertices": n, "ordered_triples": n**3, "threads": threads}
        for rec in records:
            if not rec.reverify(space, tol=1e-9):
                raise AssertionError("counterexample failed re-verification")
        return CertReport(
            space_id=space.metadata(),
            mode=mode,
            threshold=threshold,
            tol=tol,
            plan=plan,
            counterexamples=records,
            max_min_side=max_min_side,
            empirical_degeneracy=max_defect,
            min_defect_found=0.0 if records else math.inf,
        )
    if mode != "sampled":
        raise ValueError("mode must be 'vertex' or 'sampled'")
    if rng is None:
        rng = np.random.default_rng(0)
    min_defect, pts, qualifying = min_defect_search(
        space,
        side_floor=threshold,
        restarts=samples,
        rng=rng,
        bounds=bounds,
        refine_top=refine_top,
        step_floor=step_floor,
    )
    plan = {
        "samples": samples,
        "qualifying": qualifying,
        "refine_top": refine_top,
        "step_floor": step_floor,
        "bounds": bounds,
    }
    counterexamples = []
    max_min_side = 0.0
    empirical = 0.0
    if pts is not None:
        rec = TriangleRecord.measure(space, *pts)
        empirical = rec.defect
        if min_defect <= tol:
            counterexamples.append(rec)
            max_min_side = min(rec.triple.as_tuple())
    return CertReport(
        space_id=space.metadata(),
        mode=mode,
        threshold=threshold,
        tol=tol,
        plan=plan,
        counterexamples=counterexamples,
        max_min_side=max_min_side,
        empirical_degeneracy=empirical,
        min_defect_found=min_defect,
    )
