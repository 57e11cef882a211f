"""Finite models of the twisted-sector cohomology H_gamma and its compact version.

Both are built degree by degree with exact row reduction. An H_gamma depends
only on sigma(gamma): it is the polynomial ring in the link variables D_j,
modulo Stanley-Reisner monomials and the linear relations from covectors that
vanish on sigma(gamma), cut off above degree rank - |sigma(gamma)|.
H^c_gamma is spanned by symbols m * F_J where J runs over link subsets whose
cone (together with sigma(gamma)) is interior.

Elements are complex numpy vectors over the chosen bases, and every D_i acts
by an exact rational matrix (converted to float once).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, combinations_with_replacement
from typing import Sequence

import numpy as np

from . import exact
from .geometry import IndexSet
from .special import gamma_series, todd_series, twisted_todd_series
from .triangulation import Triangulation, TwistedSector, box_elements, box_size, dual_sector

TWO_PI_I = 2j * math.pi

Monomial = tuple[int, ...]  # sorted multiset of variable indices
Symbol = tuple[Monomial, IndexSet]  # m * F_J


class CohomologyError(RuntimeError):
    pass


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(sorted(a + b))


def monomial_label(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for i in sorted(set(m)):
        k = m.count(i)
        parts.append(f"D{i + 1}" + (f"^{k}" if k > 1 else ""))
    return "*".join(parts)


def symbol_label(s: Symbol, sigma: IndexSet = ()) -> str:
    m, J = s
    f = "F{" + ",".join(str(j + 1) for j in sorted(J + tuple(sigma))) + "}"
    return f if not m else monomial_label(m) + "*" + f


class _Quotient:
    """A vector space with named columns modulo the span of relation rows."""

    def __init__(self, columns: Sequence, relations: list[dict]):
        self.columns = list(columns)
        self.col_index = {c: k for k, c in enumerate(self.columns)}
        ncols = len(self.columns)
        rows = []
        for rel in relations:
            row = [Fraction(0)] * ncols
            for key, val in rel.items():
                row[self.col_index[key]] += val
            if any(row):
                rows.append(row)
        self.rows, self.pivots = exact.rref(rows, ncols) if rows else ([], [])
        self.free = [k for k in range(ncols) if k not in set(self.pivots)]

    def reduce(self, vec: dict) -> list[Fraction]:
        """Coordinates of vec over the non-pivot columns."""
        x = [Fraction(0)] * len(self.columns)
        for key, val in vec.items():
            k = self.col_index.get(key)
            if k is not None:  # unknown keys are above the degree cap
                x[k] += val
        for row, p in zip(self.rows, self.pivots):
            if x[p] != 0:
                f = x[p]
                x = [a - f * b for a, b in zip(x, row)]
        return [x[k] for k in self.free]


def _annihilator(tri: Triangulation, sigma: IndexSet) -> list[list[Fraction]]:
    cone = tri.cone
    return exact.nullspace([cone.points[i] for i in sigma], cone.rank)


def _lifted_divisors(tri: Triangulation, sigma: IndexSet, link: IndexSet) -> dict[int, dict[int, Fraction]]:
    """D_i for i in sigma as combinations of link variables.

    From sum_i D_i v_i = 0: D_sigma = -(V^T V)^{-1} V^T sum_{j in link} v_j D_j.
    """
    if not sigma:
        return {}
    cone = tri.cone
    V = [cone.points[i] for i in sigma]  # rows are v_i
    gram = [[exact.dot(a, b) for b in V] for a in V]
    ginv = exact.inverse(gram)
    out = {}
    for a, i in enumerate(sigma):
        combo = {}
        for j in link:
            proj = [exact.dot(V[b], cone.points[j]) for b in range(len(sigma))]
            coef = -exact.dot(ginv[a], proj)
            if coef != 0:
                combo[j] = coef
        out[i] = combo
    return out


def _series_of(A: np.ndarray, coeffs: Sequence, cap: int) -> np.ndarray:
    """sum_k coeffs[k] A^k for a nilpotent A with A^{cap+1} = 0."""
    dim = A.shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim, dtype=complex)
    for k in range(min(cap, len(coeffs) - 1) + 1):
        out += complex(coeffs[k]) * power
        power = power @ A
    return out


class _Module:
    """Shared machinery: basis, exact D-action, float operators."""

    tri: Triangulation
    sector: TwistedSector
    link: IndexSet
    degree_cap: int
    lifted_D: dict[int, dict[int, Fraction]]
    exact_actions: dict[int, list[list[Fraction]]]

    @property
    def sigma(self) -> IndexSet:
        return self.sector.sigma

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _lift_actions(self, link_actions: dict[int, list[list[Fraction]]]) -> dict[int, list[list[Fraction]]]:
        dim = self.dim
        acts = dict(link_actions)
        for i, combo in self.lifted_D.items():
            m = [[Fraction(0)] * dim for _ in range(dim)]
            for j, c in combo.items():
                for a in range(dim):
                    for b in range(dim):
                        m[a][b] += c * link_actions[j][a][b]
            acts[i] = m
        return acts

    @cached_property
    def actions(self) -> list[np.ndarray]:
        """Float matrix of multiplication by D_i for every i (zero off the star)."""
        n = self.tri.cone.n
        out = []
        for i in range(n):
            if i in self.exact_actions:
                out.append(np.array([[float(x) for x in r] for r in self.exact_actions[i]], dtype=float).reshape(self.dim, self.dim))
            else:
                out.append(np.zeros((self.dim, self.dim)))
        return out

    def monomial_operator(self, m: Monomial) -> np.ndarray:
        op = np.eye(self.dim)
        for i in m:
            op = self.actions[i] @ op
        return op

    def series_operator(self, i: int, coeffs: Sequence) -> np.ndarray:
        return _series_of(self.actions[i], coeffs, self.degree_cap)

    def degrees(self) -> np.ndarray:
        return np.array([self._degree(b) for b in self.basis])


class HPresentation(_Module):
    """H_gamma as a quotient of the polynomial ring in the link variables."""

    def __init__(self, tri: Triangulation, sector: TwistedSector):
        self.tri = tri
        self.sector = sector
        sigma = sector.sigma
        self.link = tri.link(sigma)
        self.degree_cap = tri.cone.rank - len(sigma)
        cap = self.degree_cap
        monos = [m for k in range(cap + 1) for m in combinations_with_replacement(self.link, k)]
        monos.sort(key=lambda m: (len(m), m))
        rels: list[dict] = []
        for m in monos:
            if not tri.is_cone(set(m) | set(sigma)):
                rels.append({m: Fraction(1)})
        self.linear_relations = []
        for mu in _annihilator(tri, sigma):
            lin = {j: exact.dot(mu, tri.cone.points[j]) for j in self.link}
            lin = {j: c for j, c in lin.items() if c != 0}
            if not lin:
                continue
            self.linear_relations.append(lin)
            for m in monos:
                if len(m) < cap:
                    rels.append({_mono_mul(m, (j,)): c for j, c in lin.items()})
        self._q = _Quotient(monos, rels)
        self.basis: list[Monomial] = sorted((monos[k] for k in self._q.free), key=lambda m: (len(m), m))
        order = [self._q.free.index(monos.index(b)) for b in self.basis]
        self._order = order
        if not self.basis or self.basis[0] != ():
            raise CohomologyError("unit class vanished")
        self.lifted_D = _lifted_divisors(tri, sigma, self.link)
        link_actions = {}
        for j in self.link:
            cols = [self.reduce({_mono_mul(b, (j,)): Fraction(1)}) for b in self.basis]
            link_actions[j] = exact.transpose(cols)
        self.exact_actions = self._lift_actions(link_actions)

    @staticmethod
    def _degree(m: Monomial) -> int:
        return len(m)

    def reduce(self, poly: dict[Monomial, Fraction]) -> list[Fraction]:
        """Exact coordinates of a polynomial in the link variables."""
        poly = {m: c for m, c in poly.items() if len(m) <= self.degree_cap}
        red = self._q.reduce(poly)
        return [red[k] for k in self._order]

    def unit(self) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[0] = 1
        return e

    def element(self, poly: dict[Monomial, complex]) -> np.ndarray:
        """Coordinates of a polynomial in any D_i (lifted ones included)."""
        out = np.zeros(self.dim, dtype=complex)
        for m, c in poly.items():
            out += c * self.monomial_operator(m)[:, 0]
        return out

    @cached_property
    def basis_operators(self) -> list[np.ndarray]:
        return [self.monomial_operator(b) for b in self.basis]

    def operator_of(self, a: np.ndarray) -> np.ndarray:
        """Matrix of multiplication by the class a."""
        return sum((c * op for c, op in zip(a, self.basis_operators)), np.zeros((self.dim, self.dim), dtype=complex))

    def labels(self) -> list[str]:
        return [monomial_label(b) for b in self.basis]


class HcPresentation(_Module):
    """H^c_gamma spanned by symbols m * F_J modulo the module relations."""

    def __init__(self, tri: Triangulation, sector: TwistedSector, h: HPresentation | None = None):
        self.tri = tri
        self.sector = sector
        sigma = sector.sigma
        cone = tri.cone
        self.link = tri.link(sigma)
        self.degree_cap = cone.rank - len(sigma)
        cap = self.degree_cap
        self.generators: list[IndexSet] = [
            J
            for k in range(cap + 1)
            for J in combinations(self.link, k)
            if tri.is_cone(set(J) | set(sigma)) and tri.is_interior_cone(tuple(J) + tuple(sigma))
        ]
        symbols: list[Symbol] = [
            (m, J) for J in self.generators for k in range(cap - len(J) + 1) for m in combinations_with_replacement(self.link, k)
        ]
        gens = set(self.generators)
        rels: list[dict] = []
        for m, J in symbols:
            if len(m) + len(J) >= cap:
                continue
            for i in self.link:
                if i in J:
                    continue
                Ji = tuple(sorted(J + (i,)))
                if tri.is_cone(set(Ji) | set(sigma)):
                    if Ji not in gens:
                        raise CohomologyError(f"cone {Ji} lost interiority")
                    rels.append({(_mono_mul(m, (i,)), J): Fraction(1), (m, Ji): Fraction(-1)})
                else:
                    rels.append({(_mono_mul(m, (i,)), J): Fraction(1)})
        for mu in _annihilator(tri, sigma):
            lin = {j: exact.dot(mu, cone.points[j]) for j in self.link}
            lin = {j: c for j, c in lin.items() if c != 0}
            if not lin:
                continue
            for m, J in symbols:
                if len(m) + len(J) < cap:
                    rels.append({(_mono_mul(m, (j,)), J): c for j, c in lin.items()})
        # pure generators last (descending) so they survive as basis elements
        dressed = sorted(s for s in symbols if s[0])
        pure = sorted((s for s in symbols if not s[0]), reverse=True)
        self._q = _Quotient(dressed + pure, rels)
        cols = self._q.columns
        self.basis: list[Symbol] = sorted((cols[k] for k in self._q.free), key=lambda s: (len(s[0]) + len(s[1]), s[1], s[0]))
        self._order = [self._q.free.index(cols.index(b)) for b in self.basis]
        self.lifted_D = _lifted_divisors(tri, sigma, self.link)
        link_actions = {}
        for j in self.link:
            colv = [self.reduce({(_mono_mul(m, (j,)), J): Fraction(1)}) for m, J in self.basis]
            link_actions[j] = exact.transpose(colv) if colv else []
        self.exact_actions = self._lift_actions(link_actions)
        self.integral = self._integration_functional()
        if h is not None and h.dim != self.dim:
            raise CohomologyError(f"dim H^c = {self.dim} but dim H = {h.dim} for sector {sector.label()}")

    @staticmethod
    def _degree(s: Symbol) -> int:
        return len(s[0]) + len(s[1])

    def reduce(self, vec: dict[Symbol, Fraction]) -> list[Fraction]:
        vec = {s: c for s, c in vec.items() if self._degree(s) <= self.degree_cap}
        red = self._q.reduce(vec)
        return [red[k] for k in self._order]

    def generator(self, J: Sequence[int]) -> np.ndarray:
        """Coordinates of F_J; zero when J is not an admissible generator."""
        J = tuple(sorted(J))
        if J not in set(self.generators):
            return np.zeros(self.dim, dtype=complex)
        return np.array([complex(x) for x in self.reduce({((), J): Fraction(1)})], dtype=complex)

    def top_volume(self, J: IndexSet) -> Fraction:
        """Vol of the image of cone J in the quotient fan by sigma(gamma)."""
        from .geometry import normalized_volume

        full = tuple(sorted(J + self.sigma))
        return Fraction(normalized_volume(self.tri.cone, full), box_size(self.tri, self.sigma))

    def _integration_functional(self) -> np.ndarray:
        cap = self.degree_cap
        rows, rhs = [], []
        for s in self._q.columns:
            deg = self._degree(s)
            if deg < cap:
                rows.append(self.reduce({s: Fraction(1)}))
                rhs.append(Fraction(0))
            elif not s[0]:
                rows.append(self.reduce({s: Fraction(1)}))
                rhs.append(1 / self.top_volume(s[1]))
        lam = exact.solve(rows, rhs) if rows else []
        if lam is None or (self.dim and exact.rank(rows, self.dim) < self.dim):
            raise CohomologyError(f"integration inconsistent in sector {self.sector.label()}")
        self.exact_integral = lam
        return np.array([float(x) for x in lam], dtype=float)

    def integrate(self, q: np.ndarray) -> complex:
        return complex(self.integral @ q)

    def labels(self) -> list[str]:
        return [symbol_label(b, self.sigma) for b in self.basis]


# --------------------------------------------------------------- sector data

@dataclass
class SectorData:
    index: int
    sector: TwistedSector
    dual_index: int
    H: HPresentation
    Hc: HcPresentation

    @property
    def label(self) -> str:
        return self.sector.label()


class Cohomology:
    """All twisted sectors of a triangulation with their H and H^c models."""

    def __init__(self, tri: Triangulation):
        self.tri = tri
        self.box = box_elements(tri)
        pos = {s.gamma: k for k, s in enumerate(self.box)}
        self.sectors: list[SectorData] = []
        for k, s in enumerate(self.box):
            h = HPresentation(tri, s)
            hc = HcPresentation(tri, s, h)
            self.sectors.append(SectorData(k, s, pos[dual_sector(tri, s).gamma], h, hc))

    def __iter__(self):
        return iter(self.sectors)

    def __len__(self):
        return len(self.sectors)

    def __getitem__(self, k: int) -> SectorData:
        return self.sectors[k]

    def index_of(self, gamma: Sequence[int]) -> int:
        for s in self.sectors:
            if s.sector.gamma == tuple(gamma):
                return s.index
        raise KeyError(f"{tuple(gamma)} is not a Box element")

    @property
    def total_dim(self) -> int:
        return sum(s.H.dim for s in self.sectors)

    @property
    def total_compact_dim(self) -> int:
        return sum(s.Hc.dim for s in self.sectors)

    # ---- classes
    def dual_star(self, k: int, a: np.ndarray) -> np.ndarray:
        """P(D) in H_gamma to P(-D) in H_{gamma dual} (same presentation)."""
        return dual_star(self.sectors[k].H, a)

    def todd(self, k: int) -> np.ndarray:
        return todd_class(self.sectors[k].H, self.sectors[k].sector)

    def gamma_hat(self, k: int) -> np.ndarray:
        return gamma_hat(self.sectors[k].H, self.sectors[k].sector)

    def chi(self, a: dict[int, np.ndarray], b: dict[int, np.ndarray]) -> complex:
        """Euler pairing of sector-graded a (in H) and b (in H^c)."""
        total = 0j
        for k, av in a.items():
            s = self.sectors[k]
            d = self.sectors[s.dual_index]
            bv = b.get(d.index)
            if bv is None:
                continue
            total += _chi_block(d, self.dual_star(k, av), bv) / box_size(self.tri, s.sector.sigma)
        return total

    def chi_matrix(self, k: int) -> np.ndarray:
        """X[p, q] = chi(e_p in H_gamma_k, f_q in H^c of the dual sector)."""
        s = self.sectors[k]
        d = self.sectors[s.dual_index]
        X = np.zeros((s.H.dim, d.Hc.dim), dtype=complex)
        for p in range(s.H.dim):
            e = np.zeros(s.H.dim, dtype=complex)
            e[p] = 1
            for q in range(d.Hc.dim):
                f = np.zeros(d.Hc.dim, dtype=complex)
                f[q] = 1
                X[p, q] = self.chi({k: e}, {d.index: f})
        return X


def _chi_block(d: SectorData, a_star: np.ndarray, b: np.ndarray) -> complex:
    td = todd_class(d.H, d.sector)
    prod = d.H.operator_of(td) @ a_star
    acted = _act(d.H, d.Hc, prod, b)
    return d.Hc.integrate(acted)


def _act(h: HPresentation, hc: HcPresentation, a: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.zeros(hc.dim, dtype=complex)
    for c, m in zip(a, h.basis):
        if c != 0:
            out += c * (hc.monomial_operator(m) @ q)
    return out


def mul_H(h: HPresentation, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return h.operator_of(a) @ b


def act_Hc(h: HPresentation, hc: HcPresentation, a: np.ndarray, q: np.ndarray) -> np.ndarray:
    if h.sigma != hc.sigma or h.tri is not hc.tri:
        raise CohomologyError("classes live over different sectors")
    return _act(h, hc, a, q)


def dual_star(h: HPresentation, a: np.ndarray) -> np.ndarray:
    return ((-1.0) ** h.degrees()) * a


def todd_class(h: HPresentation, sector: TwistedSector) -> np.ndarray:
    """Todd class of the sector, twisted on sigma(gamma) by its phases."""
    cap = h.degree_cap
    op = np.eye(h.dim, dtype=complex)
    td = [float(x) for x in todd_series(cap)]
    for j in h.link:
        op = op @ h.series_operator(j, td)
    for i, g in zip(sector.sigma, sector.coeffs):
        q = cmath.exp(-TWO_PI_I * float(g))
        op = op @ h.series_operator(i, twisted_todd_series(q, cap))
    return op[:, 0]


def _gamma_operator(h: HPresentation, sector: TwistedSector, inverse: bool = False) -> np.ndarray:
    cap = h.degree_cap
    op = np.eye(h.dim, dtype=complex)
    shifts = [(i, float(g)) for i, g in zip(sector.sigma, sector.coeffs)] + [(j, 1.0) for j in h.link]
    for i, a in shifts:
        ser = gamma_series(a, cap).astype(complex)
        if inverse:
            from .special import series_inv

            ser = series_inv(ser, cap)
        ser = ser / TWO_PI_I ** np.arange(cap + 1)
        op = op @ h.series_operator(i, ser)
    return op


def gamma_hat(h: HPresentation, sector: TwistedSector) -> np.ndarray:
    return _gamma_operator(h, sector)[:, 0]


def gamma_hat_inverse(h: HPresentation, sector: TwistedSector) -> np.ndarray:
    return _gamma_operator(h, sector, inverse=True)[:, 0]


def gamma_todd_residual(coh: Cohomology, k: int) -> float:
    """Max deviation of dual_star(G_gamma) * G_dual from (2 pi i)^|sigma| (-1)^deg Td(dual)."""
    s = coh[k]
    d = coh[s.dual_index]
    lhs = mul_H(d.H, coh.dual_star(k, coh.gamma_hat(k)), coh.gamma_hat(d.index))
    sign = (-1) ** coh.tri.cone.degree(d.sector.gamma)
    rhs = TWO_PI_I ** len(s.sector.sigma) * sign * coh.todd(d.index)
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def total_divisor_residual(h: HPresentation) -> float:
    """|sum_i D_i| as an operator on H (must vanish)."""
    n = h.tri.cone.n
    total = [[Fraction(0)] * h.dim for _ in range(h.dim)]
    for i in range(n):
        if i in h.exact_actions:
            for a in range(h.dim):
                for b in range(h.dim):
                    total[a][b] += h.exact_actions[i][a][b]
    return float(max((abs(x) for r in total for x in r), default=0))


def presentation_json(coh: Cohomology) -> list[dict]:
    out = []
    for s in coh:
        out.append(
            {
                "gamma": list(s.sector.gamma),
                "sigma": [i + 1 for i in s.sector.sigma],
                "dual": list(coh[s.dual_index].sector.gamma),
                "degree_cap": s.H.degree_cap,
                "H_basis": s.H.labels(),
                "Hc_basis": s.Hc.labels(),
                "integral": [exact.fraction_str(x) for x in s.Hc.exact_integral],
                "actions": {
                    f"D{i + 1}": [[exact.fraction_str(x) for x in r] for r in s.H.exact_actions[i]]
                    for i in sorted(s.H.exact_actions)
                },
            }
        )
    return out
