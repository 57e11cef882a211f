"""Truncated cohomology-valued Gamma-series Gamma_c (in H) and Gamma-circ_d (in H^c).

For a sector gamma the series runs over l with sum_i l_i v_i = -c and
l_i - gamma_i integral. These l form an affine copy of the integer kernel
of the point matrix; it is enumerated directly in kernel coordinates,
in a box of radius ``bound`` around the leading term, and split into
shells by the sup-norm of the kernel coordinates. Shell sizes give the
a posteriori tail estimate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Sequence

import numpy as np

from . import exact
from .cohomology import TWO_PI_I, Cohomology, HcPresentation, HPresentation
from .geometry import LatticePoint
from .kernels import accumulate_terms
from .pairing import PairingTable, evaluate_pairing
from .special import MAX_ORDER, recip_gamma_taylor
from .triangulation import _max_cone_containing


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SeriesTruncation:
    bound: int = 6
    order: int = MAX_ORDER

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("truncation bound must be >= 1")
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"order must be in [0, {MAX_ORDER}]")


@dataclass
class SeriesValue:
    """Sector-graded value of a truncated series at one point."""

    sectors: dict[int, np.ndarray]
    tail: float = 0.0  # relative tail estimate
    terms: int = 0

    def vector(self) -> np.ndarray:
        return np.concatenate([self.sectors[k] for k in sorted(self.sectors)]) if self.sectors else np.zeros(0)

    def norm(self) -> float:
        v = self.vector()
        return float(np.max(np.abs(v))) if v.size else 0.0

    def to_json(self, coh: Cohomology) -> list[dict]:
        return [
            {"gamma": list(coh[k].sector.gamma), "coords": [[float(z.real), float(z.imag)] for z in v]}
            for k, v in sorted(self.sectors.items())
        ]


def _tail_from_shells(shells: Sequence[float], kernel_rank: int, safety: float = 2.0) -> float:
    """Geometric bound on the shells beyond the last one.

    Shells can vanish or oscillate (terms landing on different sublattices),
    so the decay rate is measured only between record shells: those at or
    past the largest one that dominate every later shell. The rate is the
    worst per-step ratio between consecutive records in the outer half;
    when these ratios are still rising it is pushed to their extrapolated
    limit (ratios of Gamma-series terms approach it like r - b/m).
    """
    if kernel_rank == 0 or not any(shells):
        return 0.0
    last = len(shells) - 1
    if shells[-1] == 0.0 and not any(shells[last // 2 + 1 :]):
        return 0.0  # outer shells vanish identically
    peak = int(np.argmax(shells))
    records = [m for m in range(peak, last + 1) if shells[m] > 0 and shells[m] >= max(shells[m:])]
    rates = []
    for a, b in zip(records, records[1:]):
        if b >= last // 2:
            rates.append((b, (shells[b] / shells[a]) ** (1.0 / (b - a))))
    if not rates or records[-1] != last and shells[-1] > 0:
        return math.inf
    rho = max(r for _, r in rates)
    if len(rates) >= 2:
        (ma, ra), (mb, rb) = rates[-2], rates[-1]
        if rb > ra:
            rho = max(rho, (mb * rb - ma * ra) / (mb - ma))
    if rho >= 1:
        return math.inf
    return safety * max(shells[records[-1]:]) * rho / (1 - rho)


class GammaSeries:
    """Evaluator for Gamma_c and Gamma-circ_d over one triangulation."""

    def __init__(self, coh: Cohomology, trunc: SeriesTruncation | None = None):
        self.coh = coh
        self.tri = coh.tri
        self.cone = coh.tri.cone
        self.trunc = trunc or SeriesTruncation()
        cols = [list(p) for p in self.cone.points]
        self.kernel = exact.reduced_integer_kernel(cols)
        self.kernel_rank = len(self.kernel)

    # ---------------------------------------------------------- enumeration
    def leading_exponent(self, c: Sequence[int]) -> list[Fraction]:
        """l with l_i = -coefficient of c on its minimal cone, 0 elsewhere."""
        m, coords = _max_cone_containing(self.tri, c)
        l = [Fraction(0)] * self.cone.n
        for i, a in zip(m, coords):
            l[i] = -a
        return l

    @lru_cache(maxsize=None)
    def enumerate_L(self, c: LatticePoint, k: int, compact: bool = False) -> tuple[tuple[tuple[Fraction, ...], int], ...]:
        """Admissible exponents l with their shell index, in canonical order."""
        s = self.coh[k].sector
        n = self.cone.n
        g = [s.coefficient(i) for i in range(n)]
        target = [-a - b for a, b in zip(c, s.gamma)]
        m0 = exact.integer_solve([list(p) for p in self.cone.points], target)
        if m0 is None:
            return ()
        # center the box at the integer point closest to the leading exponent
        lead = self.leading_exponent(c)
        if self.kernel_rank:
            K = np.array(self.kernel, dtype=float).T  # n x kr
            delta = np.array([float(lead[i] - g[i] - m0[i]) for i in range(n)])
            kc = np.rint(np.linalg.lstsq(K, delta, rcond=None)[0]).astype(int)
        else:
            kc = np.zeros(0, dtype=int)
        B = self.trunc.bound
        sigma = set(s.sigma)
        out = []
        for kv in product(range(-B, B + 1), repeat=self.kernel_rank):
            m = list(m0)
            for coef, vec in zip(kc + np.array(kv, dtype=int), self.kernel):
                m = [a + int(coef) * b for a, b in zip(m, vec)]
            l = tuple(g[i] + m[i] for i in range(n))
            poles = {i for i in range(n) if l[i].denominator == 1 and l[i] < 0}
            full = poles | sigma
            if not self.tri.is_cone(full):
                continue
            if compact and not self.tri.is_interior_cone(tuple(full)):
                continue
            shell = max((abs(x) for x in kv), default=0)
            out.append((l, shell))
        out.sort(key=lambda t: (t[1], t[0]))
        return tuple(out)

    # ------------------------------------------------------------ evaluation
    def _active(self, mod) -> list[int]:
        return [i for i in range(self.cone.n) if np.any(mod.actions[i])]

    @lru_cache(maxsize=None)
    def _multi(self, k: int, compact: bool) -> tuple[np.ndarray, list[np.ndarray]]:
        s = self.coh[k]
        mod = s.Hc if compact else s.H
        cap = min(mod.degree_cap, self.trunc.order)
        active = self._active(mod)
        n = self.cone.n
        rows, ops = [], []
        for deg in range(cap + 1):
            for combo in combinations_with_replacement(active, deg):
                e = [0] * n
                for i in combo:
                    e[i] += 1
                rows.append(e)
                ops.append(mod.monomial_operator(combo) / TWO_PI_I**deg)
        return np.array(rows, dtype=np.int64).reshape(len(rows), n), ops

    def _log_x(self, x: Sequence[complex]) -> np.ndarray:
        if len(x) != self.cone.n:
            raise ValueError(f"need {self.cone.n} coordinates")
        return np.array([cmath.log(complex(z)) for z in x])

    def _exp_operator(self, mod, logx: np.ndarray) -> np.ndarray:
        cap = mod.degree_cap
        coeffs = [1 / math.factorial(j) for j in range(cap + 1)]
        gen = sum((logx[i] / TWO_PI_I * mod.actions[i] for i in range(self.cone.n)), np.zeros((mod.dim, mod.dim), dtype=complex))
        op = np.zeros((mod.dim, mod.dim), dtype=complex)
        power = np.eye(mod.dim, dtype=complex)
        for j in range(cap + 1):
            op += coeffs[j] * power
            power = power @ gen
        return op

    def _term_data(self, terms, k: int, compact: bool):
        """Weights exponent matrix and Taylor coefficients for a list of l."""
        mod = self.coh[k].Hc if compact else self.coh[k].H
        cap = mod.degree_cap
        n = self.cone.n
        T = len(terms)
        coeffs = np.zeros((T, n, cap + 1))
        L = np.zeros((T, n))
        for t, l in enumerate(terms):
            for i, li in enumerate(l):
                L[t, i] = float(li)
                if compact and li.denominator == 1 and li < 0:
                    ser = recip_gamma_taylor(li, cap + 1)[1:]  # divide by u
                else:
                    ser = recip_gamma_taylor(li, cap)
                coeffs[t, i] = ser
        return L, coeffs

    def _evaluate_sector(self, c, k: int, x, compact: bool, deriv: int | None = None):
        """Value (and shell norms) of one sector; deriv=i gives x_i d/dx_i."""
        s = self.coh[k]
        mod: HPresentation | HcPresentation = s.Hc if compact else s.H
        terms = self.enumerate_L(tuple(c), k, compact)
        zero = np.zeros(mod.dim, dtype=complex)
        if not terms or mod.dim == 0:
            return zero, [0.0] * (self.trunc.bound + 1), 0
        logx = self._log_x(x)
        E = self._exp_operator(mod, logx)
        multi, ops = self._multi(k, compact)
        ls = [l for l, _ in terms]
        shells_idx = np.array([sh for _, sh in terms])
        L, coeffs = self._term_data(ls, k, compact)
        weights = np.exp(L @ logx)
        if compact:
            groups: dict[tuple, list[int]] = {}
            for t, l in enumerate(ls):
                P = tuple(i for i, li in enumerate(l) if li.denominator == 1 and li < 0)
                groups.setdefault(P, []).append(t)
            starts = {P: mod.generator(P) / TWO_PI_I ** len(P) for P in groups}
        else:
            groups = {(): list(range(len(ls)))}
            starts = {(): mod.unit()}
        total = zero.copy()
        shell_norms = []
        for sh in range(self.trunc.bound + 1):
            shell_val = zero.copy()
            for P, idx in groups.items():
                sel = [t for t in idx if shells_idx[t] == sh]
                if not sel:
                    continue
                w = weights[sel]
                cf = coeffs[sel]
                A = accumulate_terms(w, cf, multi)
                if deriv is not None:
                    Ad = accumulate_terms(w * L[sel, deriv], cf, multi)
                vec = sum((a * (op @ starts[P]) for a, op in zip(A, ops)), zero.copy())
                if deriv is not None:
                    vd = sum((a * (op @ starts[P]) for a, op in zip(Ad, ops)), zero.copy())
                    vec = vd + (mod.actions[deriv] / TWO_PI_I) @ vec
                shell_val += vec
            shell_val = E @ shell_val
            shell_norms.append(float(np.max(np.abs(shell_val))) if shell_val.size else 0.0)
            total += shell_val
        return total, shell_norms, len(terms)

    def _evaluate(self, c, x, compact: bool, deriv: int | None = None) -> SeriesValue:
        c = tuple(int(a) for a in c)
        if compact and not self.cone.contains_interior(c):
            raise ValueError(f"{c} is not in the interior of the cone")
        if not compact and not self.cone.contains(c):
            raise ValueError(f"{c} is not in the cone")
        sectors = {}
        tail_abs = 0.0
        scale = 0.0
        nterms = 0
        for s in self.coh:
            val, shells, nt = self._evaluate_sector(c, s.index, x, compact, deriv)
            sectors[s.index] = val
            tail_abs = max(tail_abs, _tail_from_shells(shells, self.kernel_rank))
            scale = max(scale, float(np.max(np.abs(val))) if val.size else 0.0, max(shells, default=0.0))
            nterms += nt
        rel = tail_abs / scale if scale > 0 else (0.0 if tail_abs == 0 else math.inf)
        return SeriesValue(sectors, rel, nterms)

    def eval_gamma(self, c, x) -> SeriesValue:
        return self._evaluate(c, x, compact=False)

    def eval_gamma_compact(self, d, x) -> SeriesValue:
        return self._evaluate(d, x, compact=True)

    def log_derivative(self, c, x, i: int, compact: bool = False) -> SeriesValue:
        """x_i d/dx_i of the series, termwise."""
        return self._evaluate(c, x, compact, deriv=i)

    # ------------------------------------------------------------- checks
    def verify_bbgkz(self, points, x, compact: bool = False) -> dict:
        """Relative residuals of the shift equations and homogeneity."""
        shift = 0.0
        homog = 0.0
        tail = 0.0
        r = self.cone.rank
        for c in points:
            base = self._evaluate(c, x, compact)
            tail = max(tail, base.tail)
            xd = [self.log_derivative(c, x, i, compact) for i in range(self.cone.n)]
            for i, p in enumerate(self.cone.points):
                nxt = self._evaluate(tuple(a + b for a, b in zip(c, p)), x, compact)
                lhs = xd[i].vector() / x[i]
                rhs = nxt.vector()
                shift = max(shift, _rel(lhs - rhs, lhs, rhs))
            for a in range(r):
                terms = [self.cone.points[i][a] * xd[i].vector() for i in range(self.cone.n)]
                total = sum(terms, c[a] * base.vector())
                homog = max(homog, _rel(total, c[a] * base.vector(), *terms))
        return {"shift": shift, "homogeneity": homog, "tail": tail}

    def leading_asymptotics(self, c, t: float, x, compact: bool = False) -> dict[int, np.ndarray]:
        """Single leading term at x_i t^{-psi_i} in the sector gamma-dual(c)."""
        c = tuple(int(a) for a in c)
        l = tuple(self.leading_exponent(c))
        sigma = {i for i, li in enumerate(l) if li.denominator != 1}
        # sector with coefficients frac(l_i) on sigma
        k = next(
            s.index
            for s in self.coh
            if set(s.sector.sigma) == sigma and all(s.sector.coefficient(i) == l[i] - math.floor(l[i]) for i in sigma)
        )
        xt = self.scaled_point(x, t)
        mod = self.coh[k].Hc if compact else self.coh[k].H
        logx = self._log_x(xt)
        L, coeffs = self._term_data([l], k, compact)
        multi, ops = self._multi(k, compact)
        A = accumulate_terms(np.exp(L @ logx), coeffs, multi)
        if compact:
            P = tuple(i for i, li in enumerate(l) if li.denominator == 1 and li < 0)
            start = mod.generator(P) / TWO_PI_I ** len(P)
        else:
            start = mod.unit()
        vec = sum((a * (op @ start) for a, op in zip(A, ops)), np.zeros(mod.dim, dtype=complex))
        return {k: self._exp_operator(mod, logx) @ vec}

    def scaled_point(self, x, t: float) -> list[complex]:
        # lifting heights, not psi(v_i): off-triangulation points must shrink too
        return [complex(z) * t ** (-float(h)) for z, h in zip(x, self.tri.heights)]

    # ------------------------------------------------------------- pairing
    def pairing(self, table: PairingTable, x) -> tuple[dict, float]:
        """<Gamma, Gamma-circ> at x as sector blocks, and the worst relative tail."""
        tails = [0.0]

        def phi(c):
            v = self.eval_gamma(c, x)
            tails.append(v.tail)
            return v.sectors

        def psi(d):
            v = self.eval_gamma_compact(d, x)
            tails.append(v.tail)
            return v.sectors

        return evaluate_pairing(table, phi, psi, x), max(tails)

    def pairing_limit(self, table: PairingTable, t_sequence: Sequence[float], x, tol: float = 1e-6) -> dict:
        """Pairing along x_i t^{-psi_i}; the last value once the sequence settles."""
        ts = list(t_sequence)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t_sequence must be increasing")
        values = [self.pairing(table, self.scaled_point(x, t))[0] for t in ts]
        changes = [blocks_distance(a, b) for a, b in zip(values, values[1:])]
        for a, b in zip(changes, changes[1:]):
            if b > tol and b >= a:
                raise ConvergenceError(f"pairing does not settle along t: changes {changes}")
        return values[-1]


def _rel(diff: np.ndarray, *parts: np.ndarray) -> float:
    num = float(np.max(np.abs(diff))) if diff.size else 0.0
    den = max((float(np.max(np.abs(p))) for p in parts if p.size), default=0.0)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def blocks_distance(a: dict, b: dict) -> float:
    """Max componentwise difference relative to the largest entry."""
    keys = set(a) | set(b)
    scale = max((float(np.max(np.abs(m))) for m in list(a.values()) + list(b.values()) if m.size), default=0.0)
    diff = 0.0
    for key in keys:
        ma, mb = a.get(key), b.get(key)
        if ma is None:
            ma = np.zeros_like(mb)
        if mb is None:
            mb = np.zeros_like(ma)
        if ma.size:
            diff = max(diff, float(np.max(np.abs(ma - mb))))
    return diff / scale if scale > 0 else diff
