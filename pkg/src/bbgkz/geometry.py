"""Exact lattice and cone combinatorics for a Gorenstein cone.

Indices into the point list are 0-based in this API; fixtures and reports
translate to 1-based at the I/O boundary.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Sequence

from . import exact

IndexSet = tuple[int, ...]
LatticePoint = tuple[int, ...]


class GeometryError(ValueError):
    pass


class NotSpanningError(GeometryError):
    pass


def index_set(indices: Iterable[int], n: int | None = None) -> IndexSet:
    """Validate and canonicalize an index set (sorted, duplicate free)."""
    idx = tuple(indices)
    if len(set(idx)) != len(idx):
        raise GeometryError(f"index set {idx} has duplicates")
    if n is not None and any(i < 0 or i >= n for i in idx):
        raise GeometryError(f"index set {idx} out of range for n={n}")
    return tuple(sorted(idx))


@dataclass(frozen=True)
class ConeData:
    """Points v_1..v_n on the hyperplane deg = 1 generating the cone C."""

    points: tuple[LatticePoint, ...]
    deg: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(tuple(int(x) for x in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "deg", tuple(int(x) for x in self.deg))
        if not pts:
            raise GeometryError("cone needs at least one point")
        r = len(self.deg)
        if r == 0 or any(len(p) != r for p in pts):
            raise GeometryError("points and deg must all have length rank >= 1")
        if len(set(pts)) != len(pts):
            raise GeometryError("points must be distinct")
        for i, p in enumerate(pts):
            if exact.dot(self.deg, p) != 1:
                raise GeometryError(f"point {i + 1} has deg {exact.dot(self.deg, p)}, not Gorenstein-normalized")
        if exact.rank(pts, r) != r:
            raise GeometryError("points do not span; the cone is not full-dimensional")

    @property
    def rank(self) -> int:
        return len(self.deg)

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def facets(self) -> tuple[tuple[int, ...], ...]:
        """Primitive inward facet normals of C."""
        r = self.rank
        normals = set()
        for sub in combinations(range(self.n), r - 1):
            rows = [self.points[i] for i in sub]
            ns = exact.nullspace(rows, r)
            if len(ns) != 1:
                continue
            nv = exact.primitive(ns[0])
            vals = [exact.dot(nv, p) for p in self.points]
            if all(v >= 0 for v in vals):
                normals.add(tuple(nv))
            elif all(v <= 0 for v in vals):
                normals.add(tuple(-x for x in nv))
        return tuple(sorted(normals))

    @cached_property
    def extremal(self) -> tuple[int, ...]:
        """Indices of points generating rays of C."""
        if self.rank == 1:
            return (0,)
        out = []
        for i, p in enumerate(self.points):
            tight = [f for f in self.facets if exact.dot(f, p) == 0]
            if exact.rank(tight, self.rank) == self.rank - 1:
                out.append(i)
        return tuple(out)

    def contains(self, p: Sequence) -> bool:
        return all(exact.dot(f, p) >= 0 for f in self.facets)

    def contains_interior(self, p: Sequence) -> bool:
        return all(exact.dot(f, p) > 0 for f in self.facets)

    def degree(self, p: Sequence) -> int:
        return exact.dot(self.deg, p)

    def v_sum(self, idx: Iterable[int]) -> LatticePoint:
        s = [0] * self.rank
        for i in idx:
            s = [a + b for a, b in zip(s, self.points[i])]
        return tuple(s)

    def columns(self, idx: Sequence[int]) -> list[list[int]]:
        """Matrix with the points of ``idx`` as columns (rank x |idx|)."""
        return exact.transpose([self.points[i] for i in idx]) if idx else [[] for _ in range(self.rank)]

    def coordinates(self, idx: Sequence[int], p: Sequence) -> list[Fraction]:
        """Coefficients of p in the basis {v_i : i in idx} (|idx| = rank)."""
        x = exact.solve(self.columns(idx), list(p))
        if x is None:
            raise GeometryError(f"{tuple(p)} not in the span of {idx}")
        return x

    @cached_property
    def total_volume(self) -> int:
        """Normalized volume of conv(0, v_1..v_n), via a placing triangulation."""
        simplices = _placing_triangulation(self)
        return sum(normalized_volume(self, s) for s in simplices)


def _placing_triangulation(cone: ConeData) -> list[IndexSet]:
    # beneath-beyond on the deg=1 slice, kept independent of the height-based code
    r = cone.rank
    order = list(range(cone.n))
    start = None
    for sub in combinations(order, r):
        if normalized_volume(cone, sub) > 0:
            start = sub
            break
    simplices = [start]
    placed = list(start)
    for j in order:
        if j in placed:
            continue
        current = ConeData(tuple(cone.points[i] for i in placed), cone.deg)
        new = []
        for s in simplices:
            for k in range(r):
                face = s[:k] + s[k + 1:]
                # facet of the current hull visible from v_j
                if not _is_boundary_face(current, [placed.index(i) for i in face]):
                    continue
                if _visible(cone, s, k, j):
                    new.append(tuple(sorted(face + (j,))))
        simplices.extend(new)
        placed.append(j)
    return simplices


def _is_boundary_face(cone: ConeData, face: Sequence[int]) -> bool:
    if cone.rank == 1:
        return True
    pts = [cone.points[i] for i in face]
    return any(all(exact.dot(f, p) == 0 for p in pts) for f in cone.facets)


def _visible(cone: ConeData, simplex: IndexSet, k: int, j: int) -> bool:
    face = simplex[:k] + simplex[k + 1:]
    ns = exact.nullspace([cone.points[i] for i in face], cone.rank)
    nv = ns[0]
    opp = exact.dot(nv, cone.points[simplex[k]])
    return opp * exact.dot(nv, cone.points[j]) < 0


def normalized_volume(cone: ConeData, idx: Sequence[int]) -> int:
    idx = index_set(idx, cone.n)
    if len(idx) != cone.rank:
        raise GeometryError(f"normalized volume needs {cone.rank} indices, got {len(idx)}")
    return abs(int(exact.det([cone.points[i] for i in idx])))


@dataclass(frozen=True)
class SignDecomposition:
    indices: IndexSet
    relation: tuple[int, ...]
    plus: IndexSet
    minus: IndexSet
    zero: IndexSet

    def sgn(self, j: int) -> int:
        a = self.relation[self.indices.index(j)]
        return (a > 0) - (a < 0)


def sign_decomposition(cone: ConeData, J: Sequence[int]) -> SignDecomposition:
    J = index_set(J, cone.n)
    if len(J) != cone.rank + 1:
        raise GeometryError(f"spanning sets have {cone.rank + 1} elements, got {len(J)}")
    cols = [cone.points[j] for j in J]
    if exact.rank(cols, cone.rank) != cone.rank:
        raise NotSpanningError(f"{J} is not spanning")
    ker = exact.nullspace(cone.columns(J), len(J))
    a = exact.primitive(ker[0])
    if next(x for x in a if x != 0) < 0:
        a = [-x for x in a]
    plus = tuple(j for j, x in zip(J, a) if x > 0)
    minus = tuple(j for j, x in zip(J, a) if x < 0)
    zero = tuple(j for j, x in zip(J, a) if x == 0)
    return SignDecomposition(J, tuple(a), plus, minus, zero)


def lemma_signs_mu(cone: ConeData, I: Sequence[int], k: int, j: int) -> int:
    """mu(v_j) for the covector with mu(v_k) = Vol_I and mu = 0 on I minus k."""
    I = index_set(I, cone.n)
    if k not in I or j in I:
        raise GeometryError("need k in I and j not in I")
    vol = normalized_volume(cone, I)
    if vol == 0:
        raise GeometryError(f"{I} is degenerate")
    rhs = [Fraction(vol) if i == k else Fraction(0) for i in I]
    mu = exact.solve([cone.points[i] for i in I], rhs)
    val = exact.dot(mu, cone.points[j])
    assert val.denominator == 1
    return int(val)


@dataclass(frozen=True)
class GenericVector:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(exact.to_fraction(x) for x in self.coords))


def perturbed_membership(cone: ConeData, p: Sequence, I: Sequence[int], v: GenericVector, direction: int) -> bool:
    """Whether p + direction*eps*v lies in the open cone sigma_I for small eps > 0."""
    I = index_set(I, cone.n)
    if direction not in (1, -1):
        raise GeometryError("direction must be +1 or -1")
    if len(I) != cone.rank or normalized_volume(cone, I) == 0:
        raise GeometryError(f"{I} is not a full-dimensional simplicial cone")
    alpha = cone.coordinates(I, p)
    s = cone.coordinates(I, v.coords)
    return all(a > 0 or (a == 0 and direction * si > 0) for a, si in zip(alpha, s))


def hyperplane_normals(cone: ConeData) -> list[tuple[int, ...]]:
    """Normals of all hyperplanes spanned by rank-1 of the points."""
    r = cone.rank
    out = set()
    for sub in combinations(range(cone.n), r - 1):
        ns = exact.nullspace([cone.points[i] for i in sub], r)
        if len(ns) == 1:
            nv = exact.primitive(ns[0])
            if next(x for x in nv if x != 0) < 0:
                nv = [-x for x in nv]
            out.add(tuple(nv))
    return sorted(out)


def choose_generic_v(cone: ConeData, seed: int = 0, max_tries: int = 200) -> GenericVector:
    """Seeded rejection sampling of a rational v in the interior of C.

    v is rejected when it lies on any hyperplane spanned by rank-1 of the
    points; that covers vanishing coordinates of v in every simplicial basis
    and coinciding segment endpoints along the perturbed lines.
    """
    rng = random.Random(seed)
    normals = hyperplane_normals(cone)
    last = None
    for _ in range(max_tries):
        w = [Fraction(rng.randint(1, 97), 100) for _ in range(cone.n)]
        v = [sum((wi * p[a] for wi, p in zip(w, cone.points)), Fraction(0)) for a in range(cone.rank)]
        if not cone.contains_interior(v):
            last = "not interior"
            continue
        bad = next((nv for nv in normals if exact.dot(nv, v) == 0), None)
        if bad is not None:
            last = f"on hyperplane with normal {bad}"
            continue
        return GenericVector(tuple(v))
    raise GeometryError(f"no generic vector after {max_tries} tries; last rejection: {last}")


def lattice_points_in_box(lo: Sequence[int], hi: Sequence[int]):
    return product(*(range(a, b + 1) for a, b in zip(lo, hi)))


def enumerate_pairing_points(cone: ConeData, I: Sequence[int]) -> list[tuple[LatticePoint, LatticePoint]]:
    """All lattice c = sum_{i in I} alpha_i v_i with alpha in [0,1]^I, paired with d = v_I - c."""
    I = index_set(I, cone.n)
    if len(I) != cone.rank or normalized_volume(cone, I) == 0:
        raise GeometryError(f"{I} is not a full-dimensional simplicial cone")
    vI = cone.v_sum(I)
    lo = [sum(min(0, cone.points[i][a]) for i in I) for a in range(cone.rank)]
    hi = [sum(max(0, cone.points[i][a]) for i in I) for a in range(cone.rank)]
    inv = exact.inverse(cone.columns(I))
    out = []
    for c in lattice_points_in_box(lo, hi):
        alpha = exact.matvec(inv, c)
        if all(0 <= a <= 1 for a in alpha):
            out.append((tuple(c), tuple(x - y for x, y in zip(vI, c))))
    return sorted(out)


def points_of_degree_at_most(cone: ConeData, k: int, interior: bool = False) -> list[LatticePoint]:
    """Lattice points of C (or its interior) with deg <= k."""
    lo = [k * min(0, min(p[a] for p in cone.points)) for a in range(cone.rank)]
    hi = [k * max(0, max(p[a] for p in cone.points)) for a in range(cone.rank)]
    test = cone.contains_interior if interior else cone.contains
    return sorted(
        tuple(p) for p in lattice_points_in_box(lo, hi) if cone.degree(p) <= k and test(p)
    )
