"""The pairing coefficients xi_{c,d,I}, their cocycle condition and the constant pairing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from . import exact
from .cohomology import TWO_PI_I, Cohomology, CohomologyError, _act, gamma_hat_inverse
from .geometry import (
    ConeData,
    GenericVector,
    GeometryError,
    IndexSet,
    LatticePoint,
    NotSpanningError,
    enumerate_pairing_points,
    index_set,
    normalized_volume,
    perturbed_membership,
    points_of_degree_at_most,
    sign_decomposition,
)
from .triangulation import Triangulation, dual_sector_of

XiFunction = Callable[[ConeData, Sequence[int], Sequence[int], Sequence[int], GenericVector], int]


def xi(cone: ConeData, c: Sequence[int], d: Sequence[int], I: Sequence[int], v: GenericVector) -> int:
    """(-1)^deg(c) if c + eps v and d - eps v are both in the open cone sigma_I, else 0."""
    I = index_set(I, cone.n)
    if len(I) != cone.rank:
        raise GeometryError(f"xi needs {cone.rank} indices")
    vI = cone.v_sum(I)
    if any(a + b != s for a, b, s in zip(c, d, vI)):
        raise GeometryError(f"c + d = {tuple(a + b for a, b in zip(c, d))} differs from v_I = {vI}")
    if normalized_volume(cone, I) == 0:
        return 0
    if perturbed_membership(cone, c, I, v, +1) and perturbed_membership(cone, d, I, v, -1):
        return -1 if cone.degree(c) % 2 else 1
    return 0


@dataclass(frozen=True)
class PairingEntry:
    c: LatticePoint
    d: LatticePoint
    I: IndexSet
    coeff: int  # xi * Vol_I


@dataclass(frozen=True)
class PairingTable:
    cone: ConeData
    v: GenericVector
    entries: tuple[PairingEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self) -> dict[tuple, int]:
        return {(e.c, e.d, e.I): e.coeff for e in self.entries}

    def to_json(self) -> list[dict]:
        return [
            {"c": list(e.c), "d": list(e.d), "I": [i + 1 for i in e.I], "coeff": exact.fraction_str(Fraction(e.coeff))}
            for e in self.entries
        ]


def build_pairing_table(cone: ConeData, v: GenericVector) -> PairingTable:
    entries = []
    for I in combinations(range(cone.n), cone.rank):
        vol = normalized_volume(cone, I)
        if vol == 0:
            continue
        for c, d in enumerate_pairing_points(cone, I):
            if not cone.contains_interior(d):
                continue
            x = xi(cone, c, d, I, v)
            if x:
                entries.append(PairingEntry(c, d, I, x * vol))
    entries.sort(key=lambda e: (e.I, e.c))
    return PairingTable(cone, v, tuple(entries))


# -------------------------------------------------------------- cocycle check

def check_cocycle(
    cone: ConeData,
    v: GenericVector,
    c: Sequence[int],
    d: Sequence[int],
    J: Sequence[int],
    xi_fn: XiFunction = xi,
) -> int:
    """Signed sum whose vanishing for all (c, d, J) makes the pairing constant.

    Raises NotSpanningError when J does not span (callers skip such J).
    """
    J = index_set(J, cone.n)
    sd = sign_decomposition(cone, J)
    c, d = tuple(c), tuple(d)
    vJ = cone.v_sum(J)
    if any(a + b != s for a, b, s in zip(c, d, vJ)):
        raise GeometryError("c + d must equal the sum of the points in J")
    total = 0
    for j in J:
        s = sd.sgn(j)
        if s == 0:
            continue
        rest = tuple(i for i in J if i != j)
        vj = cone.points[j]
        c1 = tuple(a - b for a, b in zip(c, vj))
        if cone.contains(c1):
            total += s * xi_fn(cone, c1, d, rest, v)
        d1 = tuple(a - b for a, b in zip(d, vj))
        if cone.contains_interior(d1):
            total += s * xi_fn(cone, c, d1, rest, v)
    return total


def cocycle_cases(cone: ConeData) -> Iterable[tuple[IndexSet, LatticePoint, LatticePoint]]:
    """Every spanning J with every c in C, d in C-interior, c + d = v_J."""
    candidates = points_of_degree_at_most(cone, cone.rank + 1)
    for J in combinations(range(cone.n), cone.rank + 1):
        if exact.rank([cone.points[j] for j in J], cone.rank) != cone.rank:
            continue
        vJ = cone.v_sum(J)
        for c in candidates:
            d = tuple(a - b for a, b in zip(vJ, c))
            if cone.contains(c) and cone.contains_interior(d):
                yield J, c, d


def exhaustive_cocycle(cone: ConeData, v: GenericVector, xi_fn: XiFunction = xi) -> tuple[int, int]:
    """(number of cases, max |signed sum|) over all cocycle cases."""
    count, worst = 0, 0
    for J, c, d in cocycle_cases(cone):
        try:
            val = check_cocycle(cone, v, c, d, J, xi_fn)
        except NotSpanningError:
            continue
        count += 1
        worst = max(worst, abs(val))
    return count, worst


def flipped_xi(target: tuple) -> XiFunction:
    """xi with the sign of one (c, d, I) entry reversed (sensitivity control)."""
    tc, td, tI = target

    def corrupted(cone, c, d, I, v):
        val = xi(cone, c, d, I, v)
        if tuple(c) == tc and tuple(d) == td and index_set(I) == tI:
            return -val
        return val

    return corrupted


# ------------------------------------------------------------- evaluation

def _x_monomial(x: Sequence[complex], I: Sequence[int]) -> complex:
    out = 1 + 0j
    for i in I:
        out *= x[i]
    return out


def evaluate_pairing(table: PairingTable, phi: Callable, psi: Callable, x: Sequence[complex]):
    """sum over entries of coeff * x_I * Phi_c (x) Psi_d.

    Scalar evaluators give a scalar. Evaluators returning {sector: vector}
    give {(k, k'): outer product block}.
    """
    phis = {}
    psis = {}
    total = None
    for e in table.entries:
        if e.c not in phis:
            phis[e.c] = phi(e.c)
        if e.d not in psis:
            psis[e.d] = psi(e.d)
        w = e.coeff * _x_monomial(x, e.I)
        a, b = phis[e.c], psis[e.d]
        if isinstance(a, dict):
            total = {} if total is None else total
            for k, av in a.items():
                for k2, bv in b.items():
                    blk = w * np.outer(av, bv)
                    total[(k, k2)] = total[(k, k2)] + blk if (k, k2) in total else blk
        else:
            total = (0j if total is None else total) + w * a * b
    return 0j if total is None else total


# -------------------------------------------------------- closed-form constant

def _entry_sector(tri: Triangulation, e: PairingEntry):
    cone = tri.cone
    alpha = cone.coordinates(e.I, e.c)
    pos = tuple(i for i, a in zip(e.I, alpha) if a > 0)
    below = tuple(i for i, a in zip(e.I, alpha) if a < 1)
    if not (tri.is_cone(pos) and tri.is_cone(below)):
        return None
    sigma = tuple(i for i, a in zip(e.I, alpha) if 0 < a < 1)
    Ic = tuple(i for i, a in zip(e.I, alpha) if a == 1)
    Id = tuple(i for i, a in zip(e.I, alpha) if a == 0)
    gamma = [sum(((1 - a) * cone.points[i][k] for i, a in zip(e.I, alpha) if 0 < a < 1), Fraction(0)) for k in range(cone.rank)]
    return sigma, tuple(int(g) for g in gamma), Ic, Id


def closed_form_constant(coh: Cohomology, table: PairingTable) -> dict[int, np.ndarray]:
    """Blocks K_gamma in H_gamma (x) H^c_{gamma dual}, keyed by the sector index."""
    tri = coh.tri
    r = tri.cone.rank
    K = {s.index: np.zeros((s.H.dim, coh[s.dual_index].Hc.dim), dtype=complex) for s in coh}
    inv_cache: dict[int, np.ndarray] = {}
    for e in table.entries:
        info = _entry_sector(tri, e)
        if info is None:
            continue
        sigma, gamma, Ic, Id = info
        k = coh.index_of(gamma)
        s = coh[k]
        d = coh[s.dual_index]
        if dual_sector_of(tri, e.c).gamma != gamma:
            raise CohomologyError(f"sector mismatch on entry c={e.c}, d={e.d}")
        if k not in inv_cache:
            inv_cache[k] = gamma_hat_inverse(s.H, s.sector)
        if d.index not in inv_cache:
            inv_cache[d.index] = gamma_hat_inverse(d.H, d.sector)
        a = s.H.monomial_operator(Ic) @ inv_cache[k]
        b = _act(d.H, d.Hc, inv_cache[d.index], d.Hc.generator(Id))
        w = e.coeff * TWO_PI_I ** len(sigma) / TWO_PI_I**r
        K[k] += w * np.outer(a, b)
    return K


def log_identity_residual(coh: Cohomology, K: dict[int, np.ndarray]) -> float:
    """max_k |(D_k (x) 1 + 1 (x) D_k) K|, which vanishes for a constant pairing."""
    worst = 0.0
    for k, blk in K.items():
        s = coh[k]
        d = coh[s.dual_index]
        for i in range(coh.tri.cone.n):
            res = s.H.actions[i] @ blk + blk @ d.Hc.actions[i].T
            if res.size:
                worst = max(worst, float(np.max(np.abs(res))))
    return worst


def inverse_residual(coh: Cohomology, K: dict[int, np.ndarray]) -> float:
    """Operator-norm deviation of (2 pi i)^rank K X^T from the identity, worst block."""
    r = coh.tri.cone.rank
    worst = 0.0
    for k, blk in K.items():
        X = coh.chi_matrix(k)
        M = TWO_PI_I**r * blk @ X.T
        worst = max(worst, float(np.linalg.norm(M - np.eye(M.shape[0]), 2)))
    return worst


def blocks_json(coh: Cohomology, K: dict[int, np.ndarray]) -> list[dict]:
    return [
        {
            "gamma": list(coh[k].sector.gamma),
            "dual": list(coh[coh[k].dual_index].sector.gamma),
            "rows": coh[k].H.labels(),
            "cols": coh[coh[k].dual_index].Hc.labels(),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in blk],
        }
        for k, blk in sorted(K.items())
    ]
