"""Output statistics of partially distinguishable photons in an interferometer.

The main entry point is :func:`output_distribution`: n single photons with
internal-state Gram matrix S enter distinct modes of an m-mode unitary, and
the function returns the exact probability of every output occupation
pattern.  Each pattern probability is a double sum over photon permutations
weighted by Gram matrix entries; the per-pattern kernel lives in
``_kernels``.

:func:`oracle_distribution` computes the same distribution by a completely
different route (explicit internal-state vectors and amplitude bookkeeping
over composite mode/internal-label outcomes) and exists as an independent
cross-check of the engine.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import pattern_sum_kernel
from .errors import (
    CapacityError,
    DegenerateCaseError,
    DimensionError,
    IndistinguoError,
    InputDataError,
)
from .matrices import validate_unitary
from .states import realize_basis, validate_gram

__all__ = [
    "ENGINE_MAX_PHOTONS",
    "ORACLE_MAX_PHOTONS",
    "OutputDistribution",
    "output_occupations",
    "output_distribution",
    "oracle_distribution",
    "full_bunching_probability",
    "full_bunching_per_mode",
    "bunching_ratio",
    "variance_from_distribution",
    "variance_closed_form",
    "variance_distinguishable",
    "two_mode_correlator",
    "distribution_from_counts",
]

ENGINE_MAX_PHOTONS = 8
ORACLE_MAX_PHOTONS = 5

# Raw pattern probabilities more negative than this indicate a bug, not
# roundoff; anything above it is clamped to zero.
_NEGATIVE_CLAMP = -1e-12
_NORMALIZATION_ATOL = 1e-9


@dataclass(frozen=True)
class OutputDistribution:
    """Exact or empirical distribution over output occupation patterns.

    ``configs`` lists every way to place ``photons`` photons in ``modes``
    modes, in lexicographically descending order; ``probs`` is aligned
    with it.
    """

    modes: int
    photons: int
    configs: tuple[tuple[int, ...], ...]
    probs: np.ndarray

    def __post_init__(self):
        if len(self.configs) != len(self.probs):
            raise DimensionError("configs and probs length mismatch")

    def prob_of(self, config) -> float:
        key = tuple(int(c) for c in config)
        try:
            return float(self.probs[self._index()[key]])
        except KeyError:
            raise InputDataError(f"configuration {key} not in distribution") from None

    def _index(self) -> dict:
        if not hasattr(self, "_idx"):
            object.__setattr__(
                self, "_idx", {c: k for k, c in enumerate(self.configs)}
            )
        return self._idx

    def to_json(self) -> dict:
        return {
            "modes": self.modes,
            "photons": self.photons,
            "probs": [
                {"config": list(c), "p": float(p)}
                for c, p in zip(self.configs, self.probs)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "OutputDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            modes = int(obj["modes"])
            photons = int(obj["photons"])
            entries = obj["probs"]
            configs = tuple(tuple(int(x) for x in e["config"]) for e in entries)
            probs = np.array([float(e["p"]) for e in entries])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputDataError(f"malformed distribution JSON: {exc}") from exc
        return cls(modes=modes, photons=photons, configs=configs, probs=probs)


def output_occupations(modes: int, photons: int) -> tuple[tuple[int, ...], ...]:
    """All occupation patterns, lexicographically descending."""
    if modes < 1 or photons < 0:
        raise DimensionError(f"need modes >= 1 and photons >= 0, got {modes}, {photons}")

    def rec(m: int, n: int):
        if m == 1:
            yield (n,)
            return
        for first in range(n, -1, -1):
            for rest in rec(m - 1, n - first):
                yield (first, *rest)

    return tuple(rec(modes, photons))


@lru_cache(maxsize=16)
def _permutation_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def _config_to_slots(config) -> list[int]:
    slots: list[int] = []
    for mode, k in enumerate(config):
        slots.extend([mode] * k)
    return slots


def _input_norm(gram: np.ndarray, input_modes) -> float:
    """Squared norm of the input state when input modes may repeat.

    Photons sharing a mode make the naive product state non-normalized;
    the correction sums Gram entries over permutations that only shuffle
    photons within a mode.
    """
    groups: dict[int, list[int]] = {}
    for k, mode in enumerate(input_modes):
        groups.setdefault(mode, []).append(k)
    total = 0.0 + 0.0j
    members = list(groups.values())
    for pieces in itertools.product(*(itertools.permutations(g) for g in members)):
        mapping = {}
        for orig, perm in zip(members, pieces):
            mapping.update(dict(zip(orig, perm)))
        prod = 1.0 + 0.0j
        for k in range(len(input_modes)):
            prod *= gram[mapping[k], k]
        total += prod
    value = complex(total)
    if abs(value.imag) > 1e-10 or value.real <= 0.0:
        raise IndistinguoError(f"invalid input-state norm {value}")
    return value.real


def _distribution_general(
    u: np.ndarray, gram: np.ndarray, input_modes: list[int]
) -> OutputDistribution:
    """Engine core; allows repeated input modes (used by the noise model)."""
    m = u.shape[0]
    n = len(input_modes)
    if n > ENGINE_MAX_PHOTONS:
        raise CapacityError(f"engine limited to {ENGINE_MAX_PHOTONS} photons, got {n}")
    if gram.shape != (n, n):
        raise DimensionError(
            f"Gram matrix {gram.shape} does not match {n} input photons"
        )
    for mode in input_modes:
        if not 0 <= mode < m:
            raise InputDataError(f"input mode {mode} outside [0, {m})")

    perms = _permutation_table(n)
    norm = _input_norm(gram, input_modes)
    cols = np.asarray(input_modes, dtype=np.int64)
    configs = output_occupations(m, n)
    probs = np.empty(len(configs))
    for idx, config in enumerate(configs):
        rows = np.asarray(_config_to_slots(config), dtype=np.int64)
        amp = u[np.ix_(rows, cols)]
        raw = pattern_sum_kernel(amp, gram, perms)
        if abs(raw.imag) > 1e-10:
            raise IndistinguoError(
                f"pattern probability has imaginary part {raw.imag:.3e}"
            )
        p = raw.real / norm
        for k in config:
            p /= math.factorial(k)
        if p < 0.0:
            if p < _NEGATIVE_CLAMP:
                raise IndistinguoError(f"pattern probability {p:.3e} is negative")
            p = 0.0
        probs[idx] = p
    total = probs.sum()
    if abs(total - 1.0) > _NORMALIZATION_ATOL:
        raise IndistinguoError(f"distribution sums to {total!r}, expected 1")
    probs /= total
    return OutputDistribution(modes=m, photons=n, configs=configs, probs=probs)


def _check_distinct_modes(u: np.ndarray, s: np.ndarray, input_modes) -> tuple:
    uu = validate_unitary(u)
    ss = validate_gram(s)
    modes = [int(x) for x in input_modes]
    if len(set(modes)) != len(modes):
        raise InputDataError(f"input modes must be distinct, got {modes}")
    if ss.shape[0] != len(modes):
        raise DimensionError(
            f"Gram matrix is {ss.shape[0]}x{ss.shape[0]} but {len(modes)} input modes given"
        )
    return uu, ss, modes


def output_distribution(u: np.ndarray, s: np.ndarray, input_modes) -> OutputDistribution:
    """Exact output distribution for photons entering ``input_modes``.

    ``u`` is the m x m interferometer (columns index inputs), ``s`` the
    n x n Gram matrix of the photons' internal states, ``input_modes`` the
    n distinct ports they enter.
    """
    uu, ss, modes = _check_distinct_modes(u, s, input_modes)
    return _distribution_general(uu, ss, modes)


def oracle_distribution(u: np.ndarray, s: np.ndarray, input_modes) -> OutputDistribution:
    """First-principles reference distribution.

    Realizes explicit internal-state vectors for the Gram matrix, then
    tracks amplitudes over multisets of (output mode, internal label)
    outcomes photon by photon.  Slower than the engine and capped at
    ``ORACLE_MAX_PHOTONS`` photons, but shares no code with it.
    """
    uu, ss, modes = _check_distinct_modes(u, s, input_modes)
    n = len(modes)
    if n > ORACLE_MAX_PHOTONS:
        raise CapacityError(f"oracle limited to {ORACLE_MAX_PHOTONS} photons, got {n}")
    m = uu.shape[0]
    basis = realize_basis(ss)
    r = basis.shape[1]
    dim = m * r

    # Amplitude vector over composite outcomes (output mode, internal label).
    # basis rows satisfy v_a . conj(v_b) = S[a, b], so the expansion
    # coefficients <q|chi_k> are the conjugated rows.
    waves = [
        np.outer(uu[:, mode], basis[k].conj()).ravel() for k, mode in enumerate(modes)
    ]

    state: dict[tuple[int, ...], complex] = {(): 1.0 + 0.0j}
    for wk in waves:
        nxt: dict[tuple[int, ...], complex] = {}
        for key, a in state.items():
            for c in range(dim):
                wc = wk[c]
                if wc == 0.0:
                    continue
                new_key = tuple(sorted(key + (c,)))
                nxt[new_key] = nxt.get(new_key, 0.0 + 0.0j) + a * wc
        state = nxt

    configs = output_occupations(m, n)
    index = {c: k for k, c in enumerate(configs)}
    probs = np.zeros(len(configs))
    for key, a in state.items():
        weight = abs(a) ** 2
        for _, group in itertools.groupby(key):
            weight *= math.factorial(len(list(group)))
        occ = [0] * m
        for c in key:
            occ[c // r] += 1
        probs[index[tuple(occ)]] += weight
    probs /= probs.sum()
    return OutputDistribution(modes=m, photons=n, configs=configs, probs=probs)


def full_bunching_per_mode(dist: OutputDistribution) -> np.ndarray:
    """Probability that all photons exit through mode i, for each i."""
    out = np.zeros(dist.modes)
    for config, p in zip(dist.configs, dist.probs):
        for i, k in enumerate(config):
            if k == dist.photons:
                out[i] = p
                break
    return out


def full_bunching_probability(dist: OutputDistribution) -> float:
    """Total probability of all photons leaving through a single mode."""
    return float(full_bunching_per_mode(dist).sum())


def bunching_ratio(u: np.ndarray, s1: np.ndarray, s2: np.ndarray, input_modes) -> float:
    """Ratio of full-bunching probabilities of two scenarios on the same U.

    For exact distributions this equals the ratio of the Gram matrix
    permanents and is independent of the interferometer.
    """
    p1 = full_bunching_probability(output_distribution(u, s1, input_modes))
    p2 = full_bunching_probability(output_distribution(u, s2, input_modes))
    if p2 <= 0.0:
        raise DegenerateCaseError("reference scenario has zero bunching probability")
    return p1 / p2


def variance_from_distribution(dist: OutputDistribution) -> float:
    """Mean per-mode photon-number variance of a distribution."""
    if dist.photons < 1:
        raise DimensionError("variance needs at least one photon")
    counts = np.asarray(dist.configs, dtype=np.float64)
    mean = dist.probs @ counts
    second = dist.probs @ counts**2
    return float((second - mean**2).sum() / dist.photons)


def variance_closed_form(u: np.ndarray, delta: np.ndarray) -> float:
    """Mean photon-number variance from moduli and pairwise overlaps alone.

    Square case, one photon per input mode.  ``delta`` is the real matrix
    of pairwise indistinguishabilities |<chi_a|chi_b>|^2.
    """
    uu = validate_unitary(u)
    n = uu.shape[0]
    d = np.asarray(delta, dtype=np.float64)
    if d.shape != (n, n):
        raise DimensionError(f"overlap matrix {d.shape} does not match {n} modes")
    p = np.abs(uu) ** 2
    q = p.T @ p
    off = d * q
    np.fill_diagonal(off, 0.0)
    return float(1.0 + off.sum() / n - np.trace(q) / n)


def variance_distinguishable(u: np.ndarray) -> float:
    """Mean photon-number variance for fully distinguishable photons."""
    uu = validate_unitary(u)
    n = uu.shape[0]
    return variance_closed_form(uu, np.eye(n))


def two_mode_correlator(u: np.ndarray, delta: np.ndarray, i: int, j: int) -> float:
    """Photon-number covariance <n_i n_j> - <n_i><n_j> between two outputs."""
    uu = validate_unitary(u)
    n = uu.shape[0]
    if i == j:
        raise InputDataError("two-mode correlator needs distinct output modes")
    if not (0 <= i < n and 0 <= j < n):
        raise InputDataError(f"output modes ({i}, {j}) outside [0, {n})")
    d = np.asarray(delta, dtype=np.float64)
    if d.shape != (n, n):
        raise DimensionError(f"overlap matrix {d.shape} does not match {n} modes")
    cross = (uu[i] * uu[j].conj())[:, None] * (uu[j] * uu[i].conj())[None, :]
    coh = d * cross.real
    np.fill_diagonal(coh, 0.0)
    p = np.abs(uu) ** 2
    return float(coh.sum() - np.dot(p[i], p[j]))


def distribution_from_counts(counts: dict, modes: int, photons: int) -> OutputDistribution:
    """Empirical distribution from a mapping of configurations to weights."""
    configs = output_occupations(modes, photons)
    index = {c: k for k, c in enumerate(configs)}
    probs = np.zeros(len(configs))
    total = 0.0
    for config, value in counts.items():
        key = tuple(int(x) for x in config)
        if key not in index:
            raise InputDataError(
                f"configuration {key} invalid for {photons} photons in {modes} modes"
            )
        if value < 0:
            raise InputDataError(f"negative count for configuration {key}")
        probs[index[key]] += float(value)
        total += float(value)
    if total <= 0.0:
        raise InputDataError("counts are empty")
    return OutputDistribution(
        modes=modes, photons=photons, configs=configs, probs=probs / total
    )
