"""Internal photon states as Gram matrices of pairwise overlaps.

A scenario with n photons is described by the n x n Gram matrix S of their
internal states: Hermitian, unit diagonal, positive semidefinite, entries
bounded by 1 in modulus.  ``S[a, b] = <chi_a | chi_b>``; the squared moduli
``|S[a, b]|^2`` are the pairwise indistinguishabilities.
"""

from __future__ import annotations

import json
import math

import numpy as np
from scipy.linalg import lapack

from .errors import DimensionError, InputDataError, InvalidScenarioError, RangeError
from .matrices import matrix_from_json, matrix_to_json

__all__ = [
    "PSD_EIGENVALUE_FLOOR",
    "validate_gram",
    "gram_from_overlaps",
    "overlaps",
    "average_overlap",
    "hom_to_overlap",
    "realize_basis",
    "scenario_from_json",
    "scenario_to_json",
]

# Most negative eigenvalue tolerated before a matrix is declared unphysical.
PSD_EIGENVALUE_FLOOR = -1e-9

_HERMITIAN_ATOL = 1e-10


def validate_gram(s: np.ndarray) -> np.ndarray:
    """Validate a Gram matrix and return it as complex128.

    Checks shape, Hermiticity, unit diagonal, entry moduli and positive
    semidefiniteness (eigenvalues above ``PSD_EIGENVALUE_FLOOR``).
    """
    a = np.asarray(s, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"Gram matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise InputDataError("Gram matrix contains non-finite entries")
    if np.abs(a - a.conj().T).max() > _HERMITIAN_ATOL:
        raise InvalidScenarioError("Gram matrix is not Hermitian")
    if np.abs(np.diagonal(a) - 1.0).max() > _HERMITIAN_ATOL:
        raise InvalidScenarioError("Gram matrix diagonal must be all ones")
    if np.abs(a).max() > 1.0 + _HERMITIAN_ATOL:
        raise InvalidScenarioError("Gram matrix entries must have modulus <= 1")
    lo = float(np.linalg.eigvalsh(a).min())
    if lo < PSD_EIGENVALUE_FLOOR:
        raise InvalidScenarioError(
            f"Gram matrix is not positive semidefinite: min eigenvalue {lo:.3e}"
        )
    return a


def gram_from_overlaps(
    delta_ab: float, delta_ac: float, delta_bc: float, phi: float = 0.0
) -> np.ndarray:
    """Three-photon Gram matrix from pairwise indistinguishabilities.

    Off-diagonal moduli are the square roots of the deltas; a collective
    phase ``phi`` sits on the (b, c) overlap.  Raises if any delta is
    outside [0, 1] or if the resulting matrix is not PSD.
    """
    deltas = (delta_ab, delta_ac, delta_bc)
    for name, d in zip(("delta_ab", "delta_ac", "delta_bc"), deltas):
        if not 0.0 <= d <= 1.0:
            raise RangeError(f"{name} must lie in [0, 1], got {d}")
    r_ab, r_ac, r_bc = (math.sqrt(d) for d in deltas)
    ph = np.exp(1j * float(phi))
    s = np.array(
        [
            [1.0, r_ab, r_ac],
            [r_ab, 1.0, r_bc * ph],
            [r_ac, r_bc * np.conj(ph), 1.0],
        ],
        dtype=np.complex128,
    )
    return validate_gram(s)


def overlaps(s: np.ndarray) -> np.ndarray:
    """Pairwise indistinguishability matrix |S_ab|^2."""
    a = validate_gram(s)
    return np.abs(a) ** 2


def average_overlap(delta: np.ndarray) -> float:
    """Mean of the off-diagonal entries of a pairwise overlap matrix."""
    d = np.asarray(delta, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionError(f"overlap matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if n < 2:
        raise DimensionError("average overlap needs at least two photons")
    off = d.sum() - np.trace(d)
    return float(off / (n * (n - 1)))


def hom_to_overlap(visibility: float, g2: float) -> float:
    """Correct a two-photon interference visibility for multiphoton noise.

    A nonzero second-order autocorrelation g2 depresses the raw visibility;
    the corrected pairwise overlap is ``(V + g2) / (1 - g2)``.
    """
    if not 0.0 <= g2 < 1.0:
        raise RangeError(f"g2 must lie in [0, 1), got {g2}")
    value = (visibility + g2) / (1.0 - g2)
    if not 0.0 <= value <= 1.0:
        raise RangeError(
            f"corrected overlap {value:.6f} outside [0, 1] "
            f"(visibility={visibility}, g2={g2})"
        )
    return float(value)


def realize_basis(s: np.ndarray) -> np.ndarray:
    """Explicit internal-state vectors reproducing a Gram matrix.

    Returns an (n, r) array whose rows v_a satisfy ``v_a . conj(v_b) =
    S[a, b]``, with r the numerical rank of S.  Uses a pivoted Cholesky
    factorization so rank-deficient (perfectly overlapping) states are
    handled; falls back to an eigendecomposition if the factorization
    residual is poor.  For a cleanly PSD input the reconstructed inner
    products match S within 1e-10.
    """
    a = validate_gram(s)
    n = a.shape[0]

    c, piv, rank, info = lapack.zpstrf(a, lower=1)
    if info >= 0 and rank > 0:
        l = np.tril(c)[:, :rank]
        x = np.empty((n, rank), dtype=np.complex128)
        x[piv - 1] = l
        if np.abs(x @ x.conj().T - a).max() <= 1e-10:
            return x

    # Borderline spectra (eigenvalues at the PSD floor): clamp and rebuild.
    w, v = np.linalg.eigh(a)
    w = np.clip(w, 0.0, None)
    keep = w > 1e-14
    x = v[:, keep] * np.sqrt(w[keep])
    return x


def scenario_from_json(obj) -> np.ndarray:
    """Load a Gram matrix from its JSON description.

    Two shapes are accepted: the three-photon form
    ``{"n": 3, "overlaps": {"ab": ., "ac": ., "bc": .}, "phase": .}``
    and the explicit matrix form used by :func:`matrix_to_json`.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise InputDataError("scenario JSON must be an object")
    if "overlaps" in obj:
        if int(obj.get("n", 3)) != 3:
            raise InputDataError("the 'overlaps' scenario form is three-photon only")
        ov = obj["overlaps"]
        try:
            d_ab, d_ac, d_bc = float(ov["ab"]), float(ov["ac"]), float(ov["bc"])
        except (KeyError, TypeError) as exc:
            raise InputDataError("scenario overlaps need keys 'ab', 'ac', 'bc'") from exc
        return gram_from_overlaps(d_ab, d_ac, d_bc, float(obj.get("phase", 0.0)))
    if "re" in obj:
        return validate_gram(matrix_from_json(obj))
    raise InputDataError("scenario JSON needs either 'overlaps' or 're'/'im' keys")


def scenario_to_json(s: np.ndarray) -> dict:
    """Serialize a Gram matrix in the explicit matrix form."""
    return matrix_to_json(validate_gram(s))
