"""Regular triangulations of the cone, twisted sectors and the PL height function."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from . import exact
from .geometry import ConeData, GeometryError, IndexSet, LatticePoint, index_set, lattice_points_in_box, normalized_volume


class DegenerateHeightsError(GeometryError):
    pass


@dataclass(frozen=True)
class TwistedSector:
    """A Box element gamma = sum_{i in sigma} coeffs_i v_i with 0 < coeffs_i < 1."""

    gamma: LatticePoint
    sigma: IndexSet
    coeffs: tuple[Fraction, ...]

    @property
    def is_untwisted(self) -> bool:
        return not self.sigma

    def coefficient(self, i: int) -> Fraction:
        return self.coeffs[self.sigma.index(i)] if i in self.sigma else Fraction(0)

    def label(self) -> str:
        return "(" + ",".join(str(x) for x in self.gamma) + ")"


@dataclass(frozen=True)
class Triangulation:
    cone: ConeData
    heights: tuple[Fraction, ...]
    maximal_cones: tuple[IndexSet, ...]

    @cached_property
    def cones(self) -> frozenset[IndexSet]:
        out = set()
        for m in self.maximal_cones:
            for k in range(len(m) + 1):
                out.update(combinations(m, k))
        return frozenset(out)

    @cached_property
    def used_rays(self) -> IndexSet:
        return tuple(sorted({i for m in self.maximal_cones for i in m}))

    @cached_property
    def _functionals(self) -> dict[IndexSet, list[Fraction]]:
        return {m: _linear_through(self.cone, m, self.heights) for m in self.maximal_cones}

    def is_cone(self, idx) -> bool:
        return tuple(sorted(idx)) in self.cones

    def volume(self) -> int:
        return sum(normalized_volume(self.cone, m) for m in self.maximal_cones)

    def is_interior_cone(self, idx: Sequence[int]) -> bool:
        """Whether the relative interior of the cone lies in the interior of C."""
        return self.cone.contains_interior(self.cone.v_sum(idx))

    def export(self) -> list[list[int]]:
        return [[i + 1 for i in m] for m in sorted(self.maximal_cones)]

    def link(self, sigma: Sequence[int]) -> IndexSet:
        """Rays i not in sigma with sigma + {i} a cone (Star(sigma) minus sigma)."""
        s = set(sigma)
        return tuple(i for i in self.used_rays if i not in s and self.is_cone(s | {i}))


def _linear_through(cone: ConeData, idx: Sequence[int], heights: Sequence[Fraction]) -> list[Fraction]:
    return exact.solve([cone.points[i] for i in idx], [heights[i] for i in idx])


def regular_triangulation(cone: ConeData, heights: Sequence) -> Triangulation:
    """Read the simplicial fan off the lower hull of the lifted points."""
    h = tuple(exact.to_fraction(x) for x in heights)
    if len(h) != cone.n:
        raise GeometryError(f"need {cone.n} heights, got {len(h)}")
    maximal = []
    for I in combinations(range(cone.n), cone.rank):
        if normalized_volume(cone, I) == 0:
            continue
        ell = _linear_through(cone, I, h)
        gaps = [h[j] - exact.dot(ell, cone.points[j]) for j in range(cone.n) if j not in I]
        if any(g < 0 for g in gaps):
            continue
        if any(g == 0 for g in gaps):
            raise DegenerateHeightsError(f"lifted points are not in general position on {tuple(i + 1 for i in I)}")
        maximal.append(I)
    tri = Triangulation(cone, h, tuple(maximal))
    _validate(tri)
    return tri


def _validate(tri: Triangulation) -> None:
    cone = tri.cone
    if not tri.maximal_cones:
        raise DegenerateHeightsError("no lower facets found")
    if tri.volume() != cone.total_volume:
        raise DegenerateHeightsError(f"volumes sum to {tri.volume()}, expected {cone.total_volume}")
    f = tri._functionals
    for a, b in combinations(tri.maximal_cones, 2):
        diff = [x - y for x, y in zip(f[a], f[b])]
        common = set(a) & set(b)
        for i in a:
            val = exact.dot(diff, cone.points[i])
            if (i in common and val != 0) or (i not in common and val <= 0):
                raise GeometryError(f"cones {a} and {b} do not meet in a common face")
        for i in b:
            val = exact.dot(diff, cone.points[i])
            if (i in common and val != 0) or (i not in common and val >= 0):
                raise GeometryError(f"cones {a} and {b} do not meet in a common face")
    for i in range(cone.n):
        if i in tri.used_rays:
            continue
        if pl_value(tri, cone.points[i]) >= tri.heights[i]:
            raise GeometryError(f"unused point {i + 1} is not strictly above the lower hull")


def star(tri: Triangulation, sigma: Sequence[int]) -> set[IndexSet]:
    s = index_set(sigma, tri.cone.n)
    if s not in tri.cones:
        raise GeometryError(f"{tuple(i + 1 for i in s)} is not a cone of the triangulation")
    return {c for c in tri.cones if set(s) <= set(c)}


def _max_cone_containing(tri: Triangulation, p: Sequence) -> tuple[IndexSet, list[Fraction]]:
    for m in tri.maximal_cones:
        coords = tri.cone.coordinates(m, p)
        if all(c >= 0 for c in coords):
            return m, coords
    raise GeometryError(f"{tuple(p)} is not in the cone")


def minimal_cone_coeffs(tri: Triangulation, p: Sequence) -> tuple[IndexSet, tuple[Fraction, ...]]:
    m, coords = _max_cone_containing(tri, p)
    sigma = tuple(i for i, c in zip(m, coords) if c != 0)
    return sigma, tuple(c for c in coords if c != 0)


def sector_of(tri: Triangulation, p: Sequence) -> TwistedSector:
    """gamma(p): fractional parts of the minimal-cone coefficients of p."""
    sigma, coeffs = minimal_cone_coeffs(tri, p)
    return _sector_from(tri.cone, sigma, [c - math.floor(c) for c in coeffs])


def dual_sector_of(tri: Triangulation, p: Sequence) -> TwistedSector:
    """gamma-dual(p): 1 - {c_j} over the non-integral coefficients of p."""
    sigma, coeffs = minimal_cone_coeffs(tri, p)
    return _sector_from(tri.cone, sigma, [(1 - (c - math.floor(c))) % 1 for c in coeffs])


def _sector_from(cone: ConeData, sigma: Sequence[int], fracs: Sequence[Fraction]) -> TwistedSector:
    keep = [(i, f) for i, f in zip(sigma, fracs) if f != 0]
    s = tuple(i for i, _ in keep)
    co = tuple(f for _, f in keep)
    g = [sum((f * cone.points[i][a] for i, f in keep), Fraction(0)) for a in range(cone.rank)]
    assert all(x.denominator == 1 for x in g)
    return TwistedSector(tuple(int(x) for x in g), s, co)


def box_elements(tri: Triangulation) -> list[TwistedSector]:
    """Box(Sigma), untwisted sector first, then sorted by (|sigma|, gamma)."""
    cone = tri.cone
    found: dict[LatticePoint, TwistedSector] = {}
    for m in tri.maximal_cones:
        lo = [sum(min(0, cone.points[i][a]) for i in m) for a in range(cone.rank)]
        hi = [sum(max(0, cone.points[i][a]) for i in m) for a in range(cone.rank)]
        inv = exact.inverse(cone.columns(m))
        for p in lattice_points_in_box(lo, hi):
            alpha = exact.matvec(inv, p)
            if all(0 <= a < 1 for a in alpha):
                p = tuple(p)
                if p not in found:
                    found[p] = _sector_from(cone, m, alpha)
    return sorted(found.values(), key=lambda s: (len(s.sigma), s.gamma))


def dual_sector(tri: Triangulation, gamma: TwistedSector) -> TwistedSector:
    return _sector_from(tri.cone, gamma.sigma, [1 - c for c in gamma.coeffs])


def box_size(tri: Triangulation, sigma: Sequence[int]) -> int:
    """|Box(sigma)|: index of the lattice spanned by sigma in its saturation."""
    return exact.gcd_of_minors([tri.cone.points[i] for i in sigma])


def pl_value(tri: Triangulation, p: Sequence) -> Fraction:
    m, _ = _max_cone_containing(tri, p)
    return exact.dot(tri._functionals[m], p)


def convergence_basepoint(tri: Triangulation, lam: float, args: Sequence[float] | None = None) -> list[complex]:
    """x_i = exp(-lam * psi_i + i * arg_i), deep inside the convergence region for large lam."""
    n = tri.cone.n
    args = [0.0] * n if args is None else list(args)
    if len(args) != n:
        raise ValueError(f"need {n} arguments")
    if any(not -math.pi < a < math.pi for a in args):
        raise ValueError("arguments must lie in the open interval (-pi, pi)")
    if lam <= 0:
        warnings.warn("lambda <= 0 gives a base point at the edge of the convergence region", stacklevel=2)
    return [cmath.exp(complex(-lam * float(h), a)) for h, a in zip(tri.heights, args)]
