"""Geometry of the triangle-inequality cone.

The cone consists of all nonnegative triples (a, b, c) in which every
entry is at most the sum of the other two.  Its boundary carries the
degenerate triples.  Everything here is measured in the max-norm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "InvalidTripleError",
    "DegenerateLoopError",
    "UndersampledLoopError",
    "SideTriple",
    "defect",
    "eps_degenerate",
    "boundary_distance",
    "simplex_project",
    "simplex_gap",
    "winding_number",
    "write_triples_csv",
    "read_triples_csv",
]


class InvalidTripleError(ValueError):
    """A side triple violates its basic shape (negative or non-finite entry)."""


class DegenerateLoopError(ValueError):
    """A loop sample lies on (or too close to) the central ray a = b = c."""


class UndersampledLoopError(ValueError):
    """Consecutive loop samples subtend an angle of pi or more."""


@dataclass(frozen=True)
class SideTriple:
    """An ordered triple of side lengths."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for v in (self.a, self.b, self.c):
            if not math.isfinite(v) or v < 0.0:
                raise InvalidTripleError(f"side lengths must be finite and >= 0, got {v!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def perimeter(self) -> float:
        return self.a + self.b + self.c

    @property
    def defect(self) -> float:
        return defect(self)

    def scaled(self, s: float) -> "SideTriple":
        if s < 0.0:
            raise InvalidTripleError("scale factor must be nonnegative")
        return SideTriple(s * self.a, s * self.b, s * self.c)

    def max_norm_distance(self, other: "SideTriple") -> float:
        o = _coerce(other)
        return max(abs(self.a - o.a), abs(self.b - o.b), abs(self.c - o.c))


def _coerce(t) -> SideTriple:
    if isinstance(t, SideTriple):
        return t
    a, b, c = t
    return SideTriple(float(a), float(b), float(c))


def defect(t) -> float:
    """Perimeter minus twice the largest side.

    Nonnegative exactly on the cone, zero exactly on its boundary, and
    equal to the smallest eps for which the triple is eps-degenerate.
    Invariant under permutations of the entries and linear in uniform
    scaling.
    """
    t = _coerce(t)
    return t.perimeter - 2.0 * max(t.a, t.b, t.c)


def eps_degenerate(t, eps: float) -> bool:
    """Whether the largest side exceeds the sum of the others minus eps."""
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    return defect(t) <= eps


def boundary_distance(t) -> float:
    """Max-norm distance from a cone member to the boundary.

    Equals defect/3: the nearest boundary point raises the largest side
    by a third of the defect and lowers the other two by the same
    amount, and no boundary face is closer (max-norm distance to the
    plane {a = b + c} is |a - b - c| / 3).  The closed form is checked
    against a brute-force boundary-grid minimizer in the test suite.
    """
    t = _coerce(t)
    d = defect(t)
    if d < 0.0:
        raise InvalidTripleError(f"triple {t.as_tuple()} is outside the cone")
    return d / 3.0


# Orthonormal frame of the plane a + b + c = 1, oriented so that the
# once-around boundary loop of the cone slice winds +1.
_E1 = (1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0), 0.0)
_E2 = (-1.0 / math.sqrt(6.0), -1.0 / math.sqrt(6.0), 2.0 / math.sqrt(6.0))
_CENTROID = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def simplex_project(t) -> tuple[float, float]:
    """Normalize to the plane a+b+c = 1 and map to 2-D chart coordinates.

    The chart is centered at the centroid (1/3, 1/3, 1/3); triples on the
    central ray map to the origin.
    """
    t = _coerce(t)
    p = t.perimeter
    if p <= 0.0:
        raise DegenerateLoopError("triple with zero perimeter cannot be normalized")
    da = t.a / p - _CENTROID[0]
    db = t.b / p - _CENTROID[1]
    dc = t.c / p - _CENTROID[2]
    x = da * _E1[0] + db * _E1[1] + dc * _E1[2]
    y = da * _E2[0] + db * _E2[1] + dc * _E2[2]
    return (x, y)


def simplex_gap(t, target) -> float:
    """Max-norm distance between the normalizations of two triples."""
    t = _coerce(t)
    u = _coerce(target)
    tp, up = t.perimeter, u.perimeter
    if tp <= 0.0 or up <= 0.0:
        raise DegenerateLoopError("cannot normalize a zero-perimeter triple")
    return max(
        abs(t.a / tp - u.a / up),
        abs(t.b / tp - u.b / up),
        abs(t.c / tp - u.c / up),
    )


_RAY_TOL = 1e-12
_PI_GUARD = math.pi - 1e-12


def winding_number(loop: Sequence) -> int:
    """Winding of a closed triple polyline about the central ray.

    Samples are normalized to the simplex slice, projected to the 2-D
    chart, and signed angle increments about the origin are summed.
    Requires an exactly closed loop (first sample equals the last).
    Odd winding is exactly nontriviality of the loop class over the
    two-element field in the slice punctured at the centroid.

    Raises DegenerateLoopError if a sample sits on the central ray and
    UndersampledLoopError if consecutive samples subtend an angle >= pi.
    """
    samples = [_coerce(t) for t in loop]
    if len(samples) < 3:
        raise ValueError("loop needs at least 3 samples")
    if samples[0].as_tuple() != samples[-1].as_tuple():
        raise ValueError("loop is not closed (first sample != last sample)")
    pts = []
    for t in samples:
        x, y = simplex_project(t)
        if math.hypot(x, y) <= _RAY_TOL:
            raise DegenerateLoopError(f"sample {t.as_tuple()} lies on the central ray")
        pts.append((x, y))
    total = 0.0
    for (ux, uy), (vx, vy) in zip(pts, pts[1:]):
        if ux == vx and uy == vy:
            continue
        ang = math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)
        if abs(ang) >= _PI_GUARD:
            raise UndersampledLoopError("angle step >= pi between consecutive samples; refine the loop")
        total += ang
    return round(total / (2.0 * math.pi))


def write_triples_csv(path, triples: Iterable, header: bool = True) -> None:
    """Write triples as CSV rows a,b,c with 17-significant-digit text."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(["a", "b", "c"])
        for t in triples:
            t = _coerce(t)
            w.writerow([format(v, ".17g") for v in t.as_tuple()])


def read_triples_csv(path) -> list[SideTriple]:
    """Read triples from CSV rows a,b,c; a non-numeric first row is a header."""
    out = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                vals = [float(x) for x in row[:3]]
            except ValueError:
                if i == 0:
                    continue
                raise
            if len(vals) < 3:
                raise ValueError(f"row {i}: expected at least 3 columns")
            out.append(SideTriple(*vals))
    return out
