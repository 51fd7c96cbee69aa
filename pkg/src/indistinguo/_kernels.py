"""Hot numeric kernels with compiled (numba) and pure numpy variants.

Two routines dominate runtime: the matrix permanent and the double sum over
photon permutations that yields output probabilities under partial
distinguishability.  Both are written once as plain Python/numpy and, when
numba is importable, compiled with ``@njit``.  Dispatch happens per call via
:func:`indistinguo._backend.active_backend`, so the two variants can be
compared directly (see ``benchmarks/benchmark_kernels.py``).

Within one backend the summation order is fixed, which makes every result
reproducible bit-for-bit across runs and thread settings.  Across backends
the results agree to floating point roundoff.
"""

from __future__ import annotations

import numpy as np

from ._backend import NUMBA_OK, active_backend

__all__ = ["permanent_kernel", "pattern_sum_kernel"]


def _permanent_gray_py(a: np.ndarray) -> complex:
    """Permanent via Ryser's subset-sum formula walked in Gray-code order.

    Cost is O(2^n * n).  The subset sign is tracked incrementally; one
    column of ``a`` is added to or removed from the running row sums per
    step.
    """
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    row = np.zeros(n, np.complex128)
    total = 0.0 + 0.0j
    sign = 1.0
    gray = 0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        flip = new_gray ^ gray
        j = 0
        while not (flip >> j) & 1:
            j += 1
        if new_gray & flip:
            for i in range(n):
                row[i] += a[i, j]
        else:
            for i in range(n):
                row[i] -= a[i, j]
        gray = new_gray
        sign = -sign
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        total += sign * prod
    if n % 2:
        total = -total
    return total


def _permanent_gray_numpy(a: np.ndarray) -> complex:
    """Vectorized Ryser formula; subsets are processed in chunks."""
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    cols = np.arange(n)
    chunk = 1 << min(n, 16)
    for start in range(1, 1 << n, chunk):
        stop = min(start + chunk, 1 << n)
        masks = np.arange(start, stop, dtype=np.int64)
        bits = (masks[:, None] >> cols) & 1
        rows = bits @ a.T.astype(np.complex128)
        terms = np.prod(rows, axis=1)
        signs = 1.0 - 2.0 * ((n - bits.sum(axis=1)) % 2)
        total += np.sum(signs * terms)
    return complex(total)


def _pattern_sum_py(amp: np.ndarray, gram: np.ndarray, perms: np.ndarray) -> complex:
    """Double permutation sum for one output pattern.

    ``amp[k, a]`` is the single-photon amplitude taking photon ``a`` to
    output slot ``k``, ``gram[a, b]`` the overlap of internal states a and
    b, and ``perms`` the full permutation table of ``n`` elements.  Returns

        sum_{r, s} conj(prod_k amp[k, r(k)]) * prod_k amp[k, s(k)]
                   * prod_k gram[r(k), s(k)]

    which is (up to occupation factorials) the pattern probability.
    """
    nfact, n = perms.shape
    b = np.empty(nfact, np.complex128)
    for s in range(nfact):
        prod = 1.0 + 0.0j
        for k in range(n):
            prod *= amp[k, perms[s, k]]
        b[s] = prod
    total = 0.0 + 0.0j
    for r in range(nfact):
        br = np.conj(b[r])
        if br == 0.0:
            continue
        for s in range(nfact):
            term = br * b[s]
            if term == 0.0:
                continue
            for k in range(n):
                term *= gram[perms[r, k], perms[s, k]]
            total += term
    return total


def _pattern_sum_numpy(amp: np.ndarray, gram: np.ndarray, perms: np.ndarray) -> complex:
    """Same sum with the inner permutation loop vectorized."""
    nfact, n = perms.shape
    cols = np.arange(n)
    b = np.prod(amp[cols[None, :], perms], axis=1)
    total = 0.0 + 0.0j
    for r in range(nfact):
        br = np.conj(b[r])
        if br == 0.0:
            continue
        gr = gram[perms[r]]
        c = np.prod(gr[cols[None, :], perms], axis=1)
        total += br * np.dot(c, b)
    return complex(total)


if NUMBA_OK:
    from numba import njit

    _permanent_gray_nb = njit(cache=True)(_permanent_gray_py)
    _pattern_sum_nb = njit(cache=True)(_pattern_sum_py)


def permanent_kernel(a: np.ndarray) -> complex:
    if active_backend() == "numba":
        return complex(_permanent_gray_nb(np.ascontiguousarray(a, np.complex128)))
    return complex(_permanent_gray_numpy(np.asarray(a, np.complex128)))


def pattern_sum_kernel(amp: np.ndarray, gram: np.ndarray, perms: np.ndarray) -> complex:
    amp = np.ascontiguousarray(amp, np.complex128)
    gram = np.ascontiguousarray(gram, np.complex128)
    perms = np.ascontiguousarray(perms, np.int64)
    if active_backend() == "numba":
        return complex(_pattern_sum_nb(amp, gram, perms))
    return complex(_pattern_sum_numpy(amp, gram, perms))
