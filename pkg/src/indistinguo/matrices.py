"""Core matrix operations: permanents, unitary builders, Haar sampling.

All functions accept and return plain numpy arrays (``complex128`` for
matrices).  Square complex matrices travel through files as JSON objects
``{"n": int, "re": [[...]], "im": [[...]]}``.
"""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

from ._kernels import permanent_kernel
from .errors import CapacityError, DimensionError, InputDataError

__all__ = [
    "UNITARY_ATOL",
    "PERMANENT_MAX_DIM",
    "NAIVE_PERMANENT_MAX_DIM",
    "permanent",
    "permanent_naive",
    "haar_random_unitary",
    "stochastic_moduli",
    "fourier_unitary",
    "cyclic_unitary",
    "validate_unitary",
    "matrix_to_json",
    "matrix_from_json",
]

UNITARY_ATOL = 1e-10
PERMANENT_MAX_DIM = 20
NAIVE_PERMANENT_MAX_DIM = 8


def _as_square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise InputDataError(f"{what} contains non-finite entries")
    return a


def validate_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Check unitarity within ``atol`` and return the matrix as complex128."""
    a = _as_square(u, "unitary")
    n = a.shape[0]
    dev = np.abs(a.conj().T @ a - np.eye(n))
    if dev.max() > atol:
        raise InputDataError(
            f"matrix is not unitary: max deviation {dev.max():.3e} > {atol:.1e}"
        )
    return a


def permanent(m: np.ndarray) -> complex:
    """Permanent of a square complex matrix.

    Uses Ryser's formula with Gray-code subset updates, O(2^n * n).
    Dimensions above ``PERMANENT_MAX_DIM`` are refused: beyond that the
    exact computation is no longer a desk-scale operation.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > PERMANENT_MAX_DIM:
        raise CapacityError(f"permanent limited to n <= {PERMANENT_MAX_DIM}, got {n}")
    return permanent_kernel(a)


def permanent_naive(m: np.ndarray) -> complex:
    """Reference permanent by explicit permutation sum, O(n! * n).

    Exists purely as an independent cross-check of :func:`permanent`;
    capped at ``NAIVE_PERMANENT_MAX_DIM``.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > NAIVE_PERMANENT_MAX_DIM:
        raise CapacityError(
            f"naive permanent limited to n <= {NAIVE_PERMANENT_MAX_DIM}, got {n}"
        )
    if n == 0:
        return 1.0 + 0.0j
    rows = range(n)
    total = 0.0 + 0.0j
    for perm in itertools.permutations(rows):
        prod = 1.0 + 0.0j
        for i, j in zip(rows, perm):
            prod *= a[i, j]
        total += prod
    return total


def haar_random_unitary(n: int, seed) -> np.ndarray:
    """Draw an n x n unitary from the Haar measure.

    Ginibre matrix -> QR decomposition -> rescale R's diagonal phases.
    ``seed`` may be anything accepted by :class:`numpy.random.default_rng`
    (an integer, a SeedSequence, or an existing Generator).
    """
    if n < 1:
        raise DimensionError(f"unitary dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z / math.sqrt(2.0))
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q


def stochastic_moduli(u: np.ndarray) -> np.ndarray:
    """Squared moduli |U_ij|^2 of a unitary, a doubly stochastic matrix."""
    a = validate_unitary(u)
    p = np.abs(a) ** 2
    n = a.shape[0]
    if np.abs(p.sum(axis=0) - 1.0).max() > 1e-9 or np.abs(p.sum(axis=1) - 1.0).max() > 1e-9:
        raise InputDataError("squared moduli are not doubly stochastic within 1e-9")
    return p


def fourier_unitary(n: int) -> np.ndarray:
    """Discrete Fourier transform matrix F_jk = exp(2*pi*i*j*k/n)/sqrt(n)."""
    if n < 1:
        raise DimensionError(f"Fourier dimension must be >= 1, got {n}")
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)


def cyclic_unitary(alpha: float) -> np.ndarray:
    """Six-mode cyclic interferometer with a tunable internal phase.

    Columns are input modes, rows output modes: the amplitude for input j
    to reach output i is ``U[i, j]``.  Three pairwise-coupled mode pairs
    are arranged in a ring; ``alpha`` is the phase picked up on the link
    feeding modes 2 and 3 (0-based).
    """
    e = np.exp(1j * float(alpha))
    u = np.array(
        [
            [1, -1, 1, 1, 0, 0],
            [1, -1, -1, -1, 0, 0],
            [e, e, 0, 0, 1, -1],
            [e, e, 0, 0, -1, 1],
            [0, 0, 1, -1, 1, 1],
            [0, 0, 1, -1, -1, -1],
        ],
        dtype=np.complex128,
    )
    return u / 2.0


def matrix_to_json(m: np.ndarray) -> dict:
    """Wire format for a square complex matrix."""
    a = _as_square(m)
    return {
        "n": int(a.shape[0]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse the wire format produced by :func:`matrix_to_json`.

    Accepts a dict or a JSON string.  ``im`` may be omitted for a real
    matrix.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "n" not in obj or "re" not in obj:
        raise InputDataError("matrix JSON must contain keys 'n' and 're'")
    n = int(obj["n"])
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj.get("im", np.zeros((n, n))), dtype=np.float64)
    if re.shape != (n, n) or im.shape != (n, n):
        raise InputDataError(
            f"matrix JSON shape mismatch: n={n}, re {re.shape}, im {im.shape}"
        )
    return re + 1j * im
