"""Exact rational and integer linear algebra on small dense matrices.

Matrices are plain lists of rows. Entries are ``int`` or ``Fraction``;
results are ``Fraction`` unless stated otherwise.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction or a ``"p/q"`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form. Returns the nonzero rows and the pivot columns."""
    m = [[to_fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of {x : A x = 0} as a list of vectors."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """One solution of A x = b, or None when inconsistent."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug, ncols + 1)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, piv):
        x[p] = row[ncols]
    return x


def det(rows: Sequence[Sequence]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    m = [[to_fraction(x) for x in r] for r in rows]
    d = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def inverse(rows: Sequence[Sequence]) -> Matrix:
    n = len(rows)
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def transpose(rows: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*rows)]


def matvec(rows: Sequence[Sequence], x: Sequence) -> list:
    return [sum((a * b for a, b in zip(r, x)), Fraction(0)) for r in rows]


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), 0)


def primitive(vec: Sequence) -> list[int]:
    """Scale a rational vector to a primitive integer vector (sign kept)."""
    fr = [to_fraction(x) for x in vec]
    den = 1
    for q in fr:
        den = den * q.denominator // gcd(den, q.denominator)
    ints = [int(q * den) for q in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        raise ValueError("zero vector has no primitive scaling")
    return [v // g for v in ints]


def gcd_of_minors(cols: Sequence[Sequence[int]]) -> int:
    """Index of the lattice spanned by ``cols`` inside its saturation.

    ``cols`` are k linearly independent integer vectors of length r. The index
    equals the gcd of all k x k minors of the r x k matrix.
    """
    k = len(cols)
    if k == 0:
        return 1
    r = len(cols[0])
    g = 0
    for rows in combinations(range(r), k):
        minor = det([[cols[j][i] for j in range(k)] for i in rows])
        g = gcd(g, int(minor))
    if g == 0:
        raise ValueError("vectors are linearly dependent")
    return g


def _integer_row_echelon(m: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Integer row echelon form H = U m with U unimodular (Euclid row steps)."""
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    h = [list(r) for r in m]
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            nz = [i for i in range(r, nrows) if h[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[p] = h[p], h[r]
            u[r], u[p] = u[p], u[r]
            done = True
            for i in range(r + 1, nrows):
                if h[i][c] != 0:
                    q = h[i][c] // h[r][c]
                    h[i] = [a - q * b for a, b in zip(h[i], h[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
                    if h[i][c] != 0:
                        done = False
            if done:
                break
        if h[r][c] != 0:
            r += 1
    return h, u


def integer_kernel(cols: Sequence[Sequence[int]]) -> list[list[int]]:
    """Lattice basis of {l in Z^n : sum_i l_i cols[i] = 0}."""
    n = len(cols)
    if n == 0:
        return []
    h, u = _integer_row_echelon([list(map(int, c)) for c in cols])
    return [u[i] for i in range(n) if all(x == 0 for x in h[i])]


def integer_solve(cols: Sequence[Sequence[int]], target: Sequence[int]) -> list[int] | None:
    """One integer l with sum_i l_i cols[i] = target, or None."""
    n = len(cols)
    r = len(target)
    if n == 0:
        return [] if all(t == 0 for t in target) else None
    h, u = _integer_row_echelon([list(map(int, c)) for c in cols])
    # target = sum_j y_j h[j]; then l = U^T y
    y = [0] * n
    residual = list(map(int, target))
    for j in range(n):
        row = h[j]
        p = next((c for c in range(r) if row[c] != 0), None)
        if p is None:
            break
        if residual[p] % row[p] != 0:
            return None
        y[j] = residual[p] // row[p]
        residual = [a - y[j] * b for a, b in zip(residual, row)]
    if any(residual):
        return None
    return [sum(u[j][i] * y[j] for j in range(n)) for i in range(n)]


def reduced_integer_kernel(cols: Sequence[Sequence[int]]) -> list[list[int]]:
    """LLL-reduced lattice basis of the integer kernel (short, nearly orthogonal)."""
    basis = integer_kernel(cols)
    if len(basis) < 2:
        return basis
    from sympy import Matrix, ZZ
    from sympy.polys.matrices import DomainMatrix

    red = DomainMatrix.from_Matrix(Matrix(basis)).convert_to(ZZ).lll().to_Matrix()
    return [[int(x) for x in red.row(i)] for i in range(red.rows)]
