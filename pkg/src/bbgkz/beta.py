"""Scalar Gamma-series solutions at a generic parameter beta and their pairing.

For a maximal cone sigma and a class gamma in Box(sigma), Phi^{gamma,sigma}_c
sums x^l / Gamma(1+l) over l with sum_i l_i v_i = beta - c, l_i integral off
sigma, and frac(l_i - beta_i) = gamma_i on sigma. Psi uses -beta and interior d.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
from scipy.special import rgamma

from . import exact
from .geometry import ConeData, GenericVector, GeometryError, IndexSet, LatticePoint, lattice_points_in_box, normalized_volume
from .pairing import PairingTable, evaluate_pairing, xi
from .triangulation import Triangulation

GENERICITY_THRESHOLD = 1e-3


class BetaGenericityError(ValueError):
    pass


@dataclass(frozen=True)
class BetaClass:
    """A maximal cone with a Box(sigma) representative gamma."""

    sigma: IndexSet
    gamma: LatticePoint
    coeffs: tuple[Fraction, ...]  # coordinates of gamma over sigma, in [0, 1)

    def label(self) -> str:
        return "sigma=" + ",".join(str(i + 1) for i in self.sigma) + " gamma=(" + ",".join(map(str, self.gamma)) + ")"


def cone_box(cone: ConeData, sigma: IndexSet) -> list[BetaClass]:
    """Coset representatives of N modulo the sublattice spanned by sigma."""
    lo = [sum(min(0, cone.points[i][a]) for i in sigma) for a in range(cone.rank)]
    hi = [sum(max(0, cone.points[i][a]) for i in sigma) for a in range(cone.rank)]
    inv = exact.inverse(cone.columns(sigma))
    out = []
    for p in lattice_points_in_box(lo, hi):
        alpha = exact.matvec(inv, p)
        if all(0 <= a < 1 for a in alpha):
            out.append(BetaClass(sigma, tuple(p), tuple(alpha)))
    return sorted(out, key=lambda b: (sum(1 for a in b.coeffs if a), b.gamma))


def beta_classes(tri: Triangulation) -> list[BetaClass]:
    return [b for sigma in sorted(tri.maximal_cones) for b in cone_box(tri.cone, sigma)]


def dual_class(cone: ConeData, bc: BetaClass) -> BetaClass:
    coeffs = tuple((1 - a) % 1 for a in bc.coeffs)
    g = [sum((a * cone.points[i][k] for i, a in zip(bc.sigma, coeffs)), Fraction(0)) for k in range(cone.rank)]
    return BetaClass(bc.sigma, tuple(int(x) for x in g), coeffs)


def beta_coordinates(cone: ConeData, sigma: IndexSet, beta: Sequence[complex]) -> np.ndarray:
    V = np.array(cone.columns(sigma), dtype=float)
    return np.linalg.solve(V, np.asarray(beta, dtype=complex))


def _dist_to_int(z: complex) -> float:
    return abs(z - round(z.real))


def check_generic(tri: Triangulation, beta: Sequence[complex], threshold: float = GENERICITY_THRESHOLD) -> None:
    for bc in beta_classes(tri):
        b = beta_coordinates(tri.cone, bc.sigma, beta)
        for i, bi, g in zip(bc.sigma, b, bc.coeffs):
            if _dist_to_int(bi + float(g)) < threshold:
                raise BetaGenericityError(
                    f"beta is not generic: beta_{i + 1} + gamma_{i + 1} = {bi + float(g):.6g} is within {threshold} of an integer ({bc.label()})"
                )


class BetaSeries:
    """Evaluator of Phi^{gamma,sigma} and Psi^{gamma,sigma} for one beta."""

    def __init__(self, tri: Triangulation, beta: Sequence[complex], bound: int = 8, check: bool = True):
        self.tri = tri
        self.cone = tri.cone
        self.beta = np.asarray(beta, dtype=complex)
        if self.beta.shape != (self.cone.rank,):
            raise ValueError(f"beta must have {self.cone.rank} coordinates")
        if check:
            check_generic(tri, self.beta)
        self.bound = bound

    def _terms(self, bc: BetaClass, c: Sequence[int], sign: int):
        """Exponent vectors l (complex on sigma) for sign*beta - c."""
        cone = self.cone
        sigma = bc.sigma
        off = [i for i in range(cone.n) if i not in sigma]
        inv = exact.inverse(cone.columns(sigma))
        bsig = beta_coordinates(cone, sigma, sign * self.beta)
        out = []
        for loff in product(range(self.bound + 1), repeat=len(off)):
            p = [-a for a in c]
            for j, lj in zip(off, loff):
                p = [a - lj * b for a, b in zip(p, cone.points[j])]
            rational = exact.matvec(inv, p)  # l_sigma - sign*beta_sigma
            if any((r - g) % 1 != 0 for r, g in zip(rational, bc.coeffs)):
                continue
            l = np.zeros(cone.n, dtype=complex)
            for j, lj in zip(off, loff):
                l[j] = lj
            for i, r, b in zip(sigma, rational, bsig):
                l[i] = float(r) + b
            out.append(l)
        return out

    def _eval(self, bc: BetaClass, c: Sequence[int], x: Sequence[complex], sign: int) -> complex:
        logx = np.array([cmath.log(complex(z)) for z in x])
        terms = self._terms(bc, c, sign)
        if not terms:
            return 0j
        L = np.array(terms)
        vals = np.exp(L @ logx) * np.prod(rgamma(1 + L), axis=1)
        return complex(np.sum(vals))

    def phi(self, bc: BetaClass, c: Sequence[int], x: Sequence[complex]) -> complex:
        return self._eval(bc, c, x, +1)

    def psi(self, bc: BetaClass, d: Sequence[int], x: Sequence[complex]) -> complex:
        return self._eval(bc, d, x, -1)

    def pairing(self, table: PairingTable, bc: BetaClass, bc2: BetaClass, x: Sequence[complex]) -> complex:
        """<Phi^{bc}, Psi^{bc2}> at x."""
        return evaluate_pairing(table, lambda c: self.phi(bc, c, x), lambda d: self.psi(bc2, d, x), x)

    def pairing_matrix(self, table: PairingTable, x: Sequence[complex]) -> tuple[list[BetaClass], np.ndarray]:
        """Rows Phi^{gamma,sigma}, columns Psi^{gamma,sigma} over all classes."""
        classes = beta_classes(self.tri)
        M = np.zeros((len(classes), len(classes)), dtype=complex)
        for a, bc in enumerate(classes):
            for b, bc2 in enumerate(classes):
                M[a, b] = self.pairing(table, bc, bc2, x)
        return classes, M


def beta_pairing_closed_form(cone: ConeData, bc: BetaClass, beta: Sequence[complex]) -> complex:
    b = beta_coordinates(cone, bc.sigma, beta)
    deg = complex(np.sum(b))
    val = cmath.exp(-1j * math.pi * deg) * normalized_volume(cone, bc.sigma) / (2j * math.pi) ** cone.rank
    for bi, g in zip(b, bc.coeffs):
        val *= 1 - cmath.exp(2j * math.pi * (bi + float(g)))
    return val


def beta_support_pair(cone: ConeData, bc: BetaClass, v: GenericVector) -> tuple[LatticePoint, LatticePoint]:
    """The unique (c, d) over sigma with nonzero xi for this class."""
    s = cone.coordinates(bc.sigma, v.coords)
    if any(si == 0 for si in s):
        raise GeometryError(f"v has a vanishing coordinate over {tuple(i + 1 for i in bc.sigma)}")
    cc = [(1 - g) if g else Fraction(int(si < 0)) for g, si in zip(bc.coeffs, s)]
    dc = [g if g else Fraction(int(si > 0)) for g, si in zip(bc.coeffs, s)]
    c = tuple(int(sum((a * cone.points[i][k] for i, a in zip(bc.sigma, cc)), Fraction(0))) for k in range(cone.rank))
    d = tuple(int(sum((a * cone.points[i][k] for i, a in zip(bc.sigma, dc)), Fraction(0))) for k in range(cone.rank))
    if xi(cone, c, d, bc.sigma, v) == 0:
        raise GeometryError(f"support pair {c}, {d} has vanishing xi")
    return c, d


def support_degree_formula(cone: ConeData, bc: BetaClass, v: GenericVector) -> int:
    """-deg(gamma) + rank - #{i : gamma_i = 0, s_i > 0}."""
    s = cone.coordinates(bc.sigma, v.coords)
    return -cone.degree(bc.gamma) + cone.rank - sum(1 for g, si in zip(bc.coeffs, s) if g == 0 and si > 0)


def random_generic_betas(tri: Triangulation, count: int, seed: int = 0) -> list[np.ndarray]:
    """Seeded complex parameters passing the genericity guard."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        b = rng.uniform(-0.45, 0.45, tri.cone.rank) + 1j * rng.uniform(-0.2, 0.2, tri.cone.rank)
        try:
            check_generic(tri, b, threshold=0.05)
        except BetaGenericityError:
            continue
        out.append(b)
    return out
