"""Finite simplicial chains over the two-element field.

Small dense GF(2) linear algebra for 2-dimensional complexes: boundary
operators, first-homology ranks with selected open faces removed (their
edges stay), and membership of a cycle in the image of the face
boundary.  Sized for the 9-vertex configuration complex, so everything
is plain uint8 elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Gf2Complex",
    "Gf2Chain",
    "build_s_complex",
    "corner_cycles",
    "mixed_face_chains",
    "boundary",
    "h1_dim",
    "h2_dim",
    "betti_numbers",
    "homologous",
    "gf2_rank",
]


def gf2_rank(m: np.ndarray) -> int:
    """Rank of a 0/1 matrix over GF(2) by row elimination."""
    a = (np.array(m, dtype=np.uint8, copy=True) & 1)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        hits = np.nonzero(a[:, c])[0]
        hits = hits[hits != r]
        a[hits] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def _gf2_solvable(a: np.ndarray, b: np.ndarray) -> bool:
    """Whether a x = b has a solution over GF(2)."""
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    return gf2_rank(aug) == gf2_rank(a)


@dataclass(frozen=True)
class Gf2Chain:
    """A chain over GF(2): a dimension and the set of supporting cell ids."""

    dim: int
    support: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.dim not in (0, 1, 2):
            raise ValueError("chain dimension must be 0, 1 or 2")
        object.__setattr__(self, "support", frozenset(int(i) for i in self.support))

    def __add__(self, other: "Gf2Chain") -> "Gf2Chain":
        if self.dim != other.dim:
            raise ValueError("cannot add chains of different dimensions")
        return Gf2Chain(self.dim, self.support ^ other.support)

    def is_zero(self) -> bool:
        return not self.support

    def to_json(self) -> dict:
        return {"dim": self.dim, "support": sorted(self.support)}


class Gf2Complex:
    """A finite 2-dimensional simplicial complex.

    Vertices are labels; edges are vertex pairs; faces are vertex
    triples whose three edges must all be present.  Cell ids are the
    positions in the stored (deduplicated) lists.
    """

    def __init__(self, vertices: Sequence, edges: Iterable, faces: Iterable = ()):
        self.vertices = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertices")
        vindex = {v: i for i, v in enumerate(self.vertices)}
        self.edges: list[tuple[int, int]] = []
        self._edge_index: dict[tuple[int, int], int] = {}
        for e in edges:
            u, v = e
            key = tuple(sorted((vindex[u], vindex[v])))
            if key[0] == key[1]:
                raise ValueError(f"degenerate edge {e!r}")
            if key in self._edge_index:
                raise ValueError(f"duplicate edge {e!r}")
            self._edge_index[key] = len(self.edges)
            self.edges.append(key)
        self.faces: list[tuple[int, int, int]] = []
        self._face_index: dict[tuple[int, int, int], int] = {}
        for f in faces:
            a, b, c = f
            key = tuple(sorted((vindex[a], vindex[b], vindex[c])))
            if len(set(key)) != 3:
                raise ValueError(f"degenerate face {f!r}")
            if key in self._face_index:
                raise ValueError(f"duplicate face {f!r}")
            for pair in ((key[0], key[1]), (key[0], key[2]), (key[1], key[2])):
                if pair not in self._edge_index:
                    raise ValueError(f"face {f!r} is missing edge {pair}")
            self._face_index[key] = len(self.faces)
            self.faces.append(key)

    def edge_id(self, u, v) -> int:
        vindex = {w: i for i, w in enumerate(self.vertices)}
        key = tuple(sorted((vindex[u], vindex[v])))
        return self._edge_index[key]

    def face_id(self, a, b, c) -> int:
        vindex = {w: i for i, w in enumerate(self.vertices)}
        key = tuple(sorted((vindex[a], vindex[b], vindex[c])))
        return self._face_index[key]

    def edge_chain(self, pairs) -> Gf2Chain:
        return Gf2Chain(1, frozenset(self.edge_id(u, v) for u, v in pairs))

    def face_chain(self, triples) -> Gf2Chain:
        return Gf2Chain(2, frozenset(self.face_id(a, b, c) for a, b, c in triples))

    def d1_matrix(self) -> np.ndarray:
        m = np.zeros((len(self.vertices), len(self.edges)), dtype=np.uint8)
        for j, (u, v) in enumerate(self.edges):
            m[u, j] = 1
            m[v, j] = 1
        return m

    def d2_matrix(self, removed_faces: frozenset[int] | set[int] = frozenset()) -> np.ndarray:
        removed = set(removed_faces)
        for fid in removed:
            if not 0 <= fid < len(self.faces):
                raise ValueError(f"no face with id {fid}")
        kept = [j for j in range(len(self.faces)) if j not in removed]
        m = np.zeros((len(self.edges), len(kept)), dtype=np.uint8)
        for col, j in enumerate(kept):
            a, b, c = self.faces[j]
            for pair in ((a, b), (a, c), (b, c)):
                m[self._edge_index[pair], col] = 1
        return m

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [[self.vertices[u], self.vertices[v]] for u, v in self.edges],
            "faces": [[self.vertices[a], self.vertices[b], self.vertices[c]] for a, b, c in self.faces],
        }


def boundary(complex_: Gf2Complex, chain: Gf2Chain) -> Gf2Chain:
    """Mod-2 boundary of a 1- or 2-chain; satisfies boundary(boundary(c)) = 0."""
    if chain.dim == 2:
        edges: set[int] = set()
        for fid in chain.support:
            a, b, c = complex_.faces[fid]
            for pair in ((a, b), (a, c), (b, c)):
                edges ^= {complex_._edge_index[pair]}
        return Gf2Chain(1, frozenset(edges))
    if chain.dim == 1:
        verts: set[int] = set()
        for eid in chain.support:
            u, v = complex_.edges[eid]
            verts ^= {u}
            verts ^= {v}
        return Gf2Chain(0, frozenset(verts))
    raise ValueError("boundary is defined for chains of dimension 1 or 2")


def h1_dim(complex_: Gf2Complex, removed_faces=frozenset()) -> int:
    """dim of (1-cycles modulo face boundaries) over GF(2).

    ``removed_faces`` are deleted open: their edges stay, so cycles that
    bounded only through them survive.
    """
    d1 = complex_.d1_matrix()
    d2 = complex_.d2_matrix(frozenset(removed_faces))
    cycles = len(complex_.edges) - gf2_rank(d1)
    return cycles - gf2_rank(d2)


def h2_dim(complex_: Gf2Complex, removed_faces=frozenset()) -> int:
    """dim of the kernel of the face boundary (no 3-cells here)."""
    d2 = complex_.d2_matrix(frozenset(removed_faces))
    return d2.shape[1] - gf2_rank(d2)


def betti_numbers(complex_: Gf2Complex, removed_faces=frozenset()) -> tuple[int, int, int]:
    d1 = complex_.d1_matrix()
    b0 = len(complex_.vertices) - gf2_rank(d1)
    return (b0, h1_dim(complex_, removed_faces), h2_dim(complex_, removed_faces))


def homologous(c1: Gf2Chain, c2: Gf2Chain, complex_: Gf2Complex, removed_faces=frozenset()) -> bool:
    """Whether two 1-cycles differ by a boundary in the restricted complex."""
    if c1.dim != 1 or c2.dim != 1:
        raise ValueError("homologous compares 1-chains")
    for c in (c1, c2):
        if not boundary(complex_, c).is_zero():
            raise ValueError("input chain is not a cycle")
    diff = c1 + c2
    if diff.is_zero():
        return True
    b = np.zeros(len(complex_.edges), dtype=np.uint8)
    for eid in diff.support:
        b[eid] = 1
    return _gf2_solvable(complex_.d2_matrix(frozenset(removed_faces)), b)


# -- the configuration complex ------------------------------------------------


def build_s_complex() -> Gf2Complex:
    """The triple join of three 3-point sets.

    One vertex per leg of each coordinate factor (u1..u3, w1..w3,
    z1..z3), an edge for every pair from distinct factors, and a
    triangle s_ijk = {u_i, w_j, z_k} for every index combination:
    9 vertices, 27 edges, 27 faces.  This is the link of the triple
    center in the cube of a three-legged tree.
    """
    u = [f"u{i}" for i in (1, 2, 3)]
    w = [f"w{i}" for i in (1, 2, 3)]
    z = [f"z{i}" for i in (1, 2, 3)]
    vertices = u + w + z
    edges = []
    for a in u:
        edges.extend((a, b) for b in w)
    for a in u:
        edges.extend((a, b) for b in z)
    for a in w:
        edges.extend((a, b) for b in z)
    faces = [(u[i], w[j], z[k]) for i in range(3) for j in range(3) for k in range(3)]
    return Gf2Complex(vertices, edges, faces)


def face_by_indices(s: Gf2Complex, i: int, j: int, k: int) -> int:
    """Face id of s_ijk (1-based indices)."""
    return s.face_id(f"u{i}", f"w{j}", f"z{k}")


def corner_cycles(s: Gf2Complex) -> tuple[Gf2Chain, Gf2Chain, Gf2Chain]:
    """The boundary triangles of the three diagonal faces s_iii."""
    return tuple(
        boundary(s, Gf2Chain(2, frozenset({face_by_indices(s, i, i, i)})))
        for i in (1, 2, 3)
    )


def diagonal_faces(s: Gf2Complex) -> frozenset[int]:
    """Ids of the three faces s_111, s_222, s_333."""
    return frozenset(face_by_indices(s, i, i, i) for i in (1, 2, 3))


def mixed_face_chains(s: Gf2Complex) -> tuple[Gf2Chain, Gf2Chain]:
    """The two face chains whose combined boundary is the corner-cycle sum.

    The first sums the six faces with pairwise-distinct indices, the
    second the nine faces with exactly one index advanced cyclically
    (s_{i,i,i+1} + s_{i,i+1,i} + s_{i+1,i,i}, indices mod 3).
    """
    perms = [(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]
    first = Gf2Chain(2, frozenset(face_by_indices(s, *p) for p in perms))
    ids = set()
    for i in (1, 2, 3):
        n = 1 if i == 3 else i + 1
        ids |= {
            face_by_indices(s, i, i, n),
            face_by_indices(s, i, n, i),
            face_by_indices(s, n, i, i),
        }
    second = Gf2Chain(2, frozenset(ids))
    return first, second
