"""Truncated power series and the Gamma-function Taylor data they need.

Series are 1-d numpy arrays of coefficients c[0] + c[1] u + ... truncated at
a fixed order. Polygamma values are computed here by upward recurrence plus
the large-argument asymptotic series; no special-function library is used.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

MAX_ORDER = 12

EULER_GAMMA = 0.57721566490153286060651209008240243

# zeta(k) for k = 2..13
ZETA = {
    2: 1.64493406684822643647241516664602519,
    3: 1.20205690315959428539973816151144999,
    4: 1.08232323371113819151600369654116790,
    5: 1.03692775514336992633136548645703417,
    6: 1.01734306198444913971451792979092053,
    7: 1.00834927738192282683979754984979676,
    8: 1.00407735619794433937868523850865247,
    9: 1.00200839282608221441785276923241206,
    10: 1.00099457512781808533714595890031902,
    11: 1.00049418860411946455870228252646994,
    12: 1.00024608655330804829863799804773967,
    13: 1.00012271334757848914675183652635740,
}

# Bernoulli numbers B_0..B_12 (B_1 = -1/2)
BERNOULLI = (
    Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30), Fraction(0),
    Fraction(1, 42), Fraction(0), Fraction(-1, 30), Fraction(0), Fraction(5, 66), Fraction(0),
    Fraction(-691, 2730),
)
# B_{2j} for the polygamma asymptotics, j = 1..10
_B2J = (
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
    Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
    Fraction(-174611, 330),
)

_SHIFT = 30.0


def _check_order(order: int) -> None:
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"series order must be in [0, {MAX_ORDER}]")


def polygamma(k: int, z: float) -> float:
    """psi^(k)(z) for real z > 0 (k = 0 is the digamma function)."""
    if z <= 0:
        raise ValueError("polygamma is only implemented for z > 0")
    acc = 0.0
    sign = -1.0 if k % 2 == 0 else 1.0  # (-1)^(k+1)
    kf = math.factorial(k)
    while z < _SHIFT:
        # psi^(k)(z) = psi^(k)(z+1) + (-1)^(k+1) k! / z^(k+1)
        acc += sign * kf / z ** (k + 1)
        z += 1.0
    if k == 0:
        s = math.log(z) - 0.5 / z
        for j, b in enumerate(_B2J, start=1):
            s -= float(b) / (2 * j * z ** (2 * j))
        return acc + s
    s = math.factorial(k - 1) / z**k + kf / (2 * z ** (k + 1))
    for j, b in enumerate(_B2J, start=1):
        s += float(b) * math.factorial(2 * j + k - 1) / (math.factorial(2 * j) * z ** (2 * j + k))
    return acc + sign * s


# ----------------------------------------------------------------- series ops

def series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.convolve(a[: order + 1], b[: order + 1])[: order + 1]
    if len(out) < order + 1:
        out = np.concatenate([out, np.zeros(order + 1 - len(out), dtype=out.dtype)])
    return out


def series_exp(a: np.ndarray, order: int) -> np.ndarray:
    """exp of a truncated series; the constant term is handled exactly."""
    a = np.asarray(a)[: order + 1]
    out = np.zeros(order + 1, dtype=np.result_type(a.dtype, float))
    out[0] = 1.0
    # f' = a' f  =>  k f_k = sum_{j=1}^k j a_j f_{k-j}
    for k in range(1, order + 1):
        out[k] = sum(j * a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)) / k
    return np.exp(a[0]) * out


def series_inv(a: np.ndarray, order: int) -> np.ndarray:
    a = np.asarray(a)[: order + 1]
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    out = np.zeros(order + 1, dtype=np.result_type(a.dtype, float))
    out[0] = 1 / a[0]
    for k in range(1, order + 1):
        out[k] = -sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)) / a[0]
    return out


def series_scale(a: np.ndarray, factor) -> np.ndarray:
    """a(factor * u)."""
    return a * factor ** np.arange(len(a))


# ------------------------------------------------------ Gamma-function series

@lru_cache(maxsize=None)
def _log_gamma1_series(order: int) -> tuple[float, ...]:
    # log Gamma(1+u) = -gamma_E u + sum_{k>=2} (-1)^k zeta(k) u^k / k
    out = [0.0] * (order + 1)
    if order >= 1:
        out[1] = -EULER_GAMMA
    for k in range(2, order + 1):
        out[k] = (-1) ** k * ZETA[k] / k
    return tuple(out)


@lru_cache(maxsize=None)
def log_gamma_series(a: float, order: int) -> tuple[float, ...]:
    """Taylor coefficients of log Gamma(a + u) at u = 0 for a > 0."""
    _check_order(order)
    if a == 1.0:
        return _log_gamma1_series(order)
    out = [math.lgamma(a)]
    for k in range(1, order + 1):
        out.append(polygamma(k - 1, a) / math.factorial(k))
    return tuple(out)


def gamma_series(a: float, order: int) -> np.ndarray:
    """Gamma(a + u) for a > 0."""
    return series_exp(np.array(log_gamma_series(float(a), order)), order)


def inv_gamma_series(a: float, order: int) -> np.ndarray:
    """1 / Gamma(a + u) for a > 0."""
    return series_exp(-np.array(log_gamma_series(float(a), order)), order)


@lru_cache(maxsize=None)
def _recip_gamma_cached(l: Fraction, order: int) -> tuple[float, ...]:
    f = l - math.floor(l)
    j = math.floor(l)
    base = inv_gamma_series(float(1 + f), order)  # 1/Gamma(1+f+u)
    poly = np.zeros(order + 1)
    poly[0] = 1.0
    if j >= 1:
        # 1/Gamma(1+f+j+u) = base * prod_{k=1}^{j} (f+k+u)^(-1)
        for k in range(1, j + 1):
            poly = series_mul(poly, series_inv(np.array([float(f + k), 1.0]), order), order)
    elif j <= -1:
        # 1/Gamma(1+f+j+u) = base * prod_{k=j+1}^{0} (f+k+u)
        for k in range(j + 1, 1):
            poly = series_mul(poly, np.array([float(f + k), 1.0]), order)
    return tuple(series_mul(poly, base, order))


def recip_gamma_taylor(l, order: int) -> np.ndarray:
    """Taylor coefficients of u -> 1/Gamma(1 + l + u) at u = 0 for rational l.

    For integer l <= -1 the constant term is exactly zero.
    """
    _check_order(order)
    return np.array(_recip_gamma_cached(Fraction(l), order))


@lru_cache(maxsize=None)
def todd_series(order: int) -> tuple[Fraction, ...]:
    """x / (1 - e^{-x}) = sum_k (-1)^k B_k x^k / k!."""
    _check_order(order)
    return tuple((-1) ** k * BERNOULLI[k] / math.factorial(k) for k in range(order + 1))


def twisted_todd_series(q: complex, order: int) -> np.ndarray:
    """1 / (1 - q e^{-x}) for q != 1."""
    if abs(1 - q) < 1e-14:
        raise ZeroDivisionError("untwisted factor has a pole; use todd_series")
    denom = np.array([-q * (-1) ** k / math.factorial(k) for k in range(order + 1)], dtype=complex)
    denom[0] += 1
    return series_inv(denom, order)
