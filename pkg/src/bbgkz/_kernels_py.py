"""Numpy implementation of the series accumulation kernel."""

import numpy as np


def accumulate_terms(weights, coeffs, multi):
    """out[m] = sum_t weights[t] * prod_i coeffs[t, i, multi[m, i]].

    weights: complex (T,), coeffs: float (T, n, K+1), multi: int64 (M, n).
    """
    weights = np.asarray(weights, dtype=np.complex128)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    multi = np.asarray(multi, dtype=np.int64)
    if weights.shape[0] == 0 or multi.shape[0] == 0:
        return np.zeros(multi.shape[0], dtype=np.complex128)
    n = coeffs.shape[1]
    picked = coeffs[:, np.arange(n)[None, :], multi]  # (T, M, n)
    return weights @ np.prod(picked, axis=2)
