"""Source noise and detection models for realistic count prediction.

Two imperfections of a quantum-dot photon source are modeled: residual
multiphoton emission (a second, fully distinguishable photon accompanies
the signal photon with probability p2) and photon loss (balanced
transmission eta0 per photon, commuted to the source).  Detected events
are post-selected on the nominal photon number, mirroring coincidence
selection in the experiment.

The detection side models pseudo-photon-number resolution: each output
mode fans out to several threshold detectors, so multi-photon occupations
are registered only when the photons split into distinct detectors.
:func:`correct_counts` undoes that efficiency per configuration.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    DegenerateCaseError,
    DimensionError,
    InputDataError,
    RangeError,
)
from .interference import (
    OutputDistribution,
    _distribution_general,
    output_occupations,
)
from .matrices import validate_unitary
from .states import validate_gram

__all__ = [
    "NOISY_MAX_PRIMARY_PHOTONS",
    "NoiseParameters",
    "DetectionModel",
    "emission_probabilities",
    "noisy_distribution",
    "pnr_detection_efficiencies",
    "CorrectedCounts",
    "correct_counts",
    "distinguishable_bunching_from_moduli",
    "reconstruct_one_distinguishable_bunching",
]

NOISY_MAX_PRIMARY_PHOTONS = 4


def emission_probabilities(g2: float, brightness: float) -> tuple[float, float, float]:
    """Per-pulse emission probabilities (vacuum, single, single+noise).

    Solves ``B = p1 + p2`` and ``g2 = 2 p2 / (p1 + 2 p2)^2`` for the
    weights of the source state.  Raises when no solution exists in
    [0, 1]^3 (that requires ``2 g2 B <= 1``).
    """
    if not 0.0 <= g2 < 1.0:
        raise RangeError(f"g2 must lie in [0, 1), got {g2}")
    if not 0.0 < brightness <= 1.0:
        raise RangeError(f"brightness must lie in (0, 1], got {brightness}")
    if g2 == 0.0:
        p2 = 0.0
    else:
        disc = 1.0 - 2.0 * g2 * brightness
        if disc < 0.0:
            raise RangeError(
                f"no emission probabilities reproduce g2={g2}, B={brightness}: "
                "need 2*g2*B <= 1"
            )
        p2 = (1.0 - g2 * brightness - math.sqrt(disc)) / g2
    p1 = brightness - p2
    p0 = 1.0 - brightness
    for name, p in (("p0", p0), ("p1", p1), ("p2", p2)):
        if not -1e-12 <= p <= 1.0:
            raise RangeError(f"emission solve left {name}={p} outside [0, 1]")
    if g2 > 0.0:
        back = 2.0 * p2 / (p1 + 2.0 * p2) ** 2
        if abs(back - g2) > 1e-9:
            raise RangeError(f"emission solve failed to round-trip g2: {back} vs {g2}")
    return max(p0, 0.0), max(p1, 0.0), max(p2, 0.0)


@dataclass(frozen=True)
class NoiseParameters:
    """Source noise description: autocorrelation, brightness, loss, weights."""

    g2: float
    brightness: float
    eta0: float
    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        if not 0.0 < self.eta0 <= 1.0:
            raise RangeError(f"eta0 must lie in (0, 1], got {self.eta0}")
        if abs(self.p0 + self.p1 + self.p2 - 1.0) > 1e-9:
            raise RangeError("emission probabilities must sum to 1")
        if abs(self.p1 + self.p2 - self.brightness) > 1e-9:
            raise RangeError("brightness must equal p1 + p2")
        if self.p2 > 0.0:
            back = 2.0 * self.p2 / (self.p1 + 2.0 * self.p2) ** 2
            if abs(back - self.g2) > 1e-9:
                raise RangeError("g2 inconsistent with emission probabilities")
        elif self.g2 != 0.0:
            raise RangeError("g2 must be 0 when p2 is 0")

    @classmethod
    def from_g2_brightness(
        cls, g2: float, brightness: float, eta0: float = 1.0
    ) -> "NoiseParameters":
        p0, p1, p2 = emission_probabilities(g2, brightness)
        return cls(g2=g2, brightness=brightness, eta0=eta0, p0=p0, p1=p1, p2=p2)

    def to_json(self) -> dict:
        return {"g2": self.g2, "brightness": self.brightness, "eta0": self.eta0}

    @classmethod
    def from_json(cls, obj) -> "NoiseParameters":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls.from_g2_brightness(
                float(obj["g2"]), float(obj["brightness"]), float(obj.get("eta0", 1.0))
            )
        except KeyError as exc:
            raise InputDataError(f"noise JSON missing key {exc}") from exc


def noisy_distribution(
    u: np.ndarray,
    s: np.ndarray,
    params: NoiseParameters,
    input_modes=None,
) -> OutputDistribution:
    """Detected n-photon distribution under source noise and balanced loss.

    Each input mode independently emits nothing, the primary photon, or the
    primary plus an orthogonal noise photon; every emitted photon then
    survives with probability eta0.  Components are propagated exactly and
    averaged, conditioned on exactly n photons arriving.
    """
    uu = validate_unitary(u)
    ss = validate_gram(s)
    n = ss.shape[0]
    if n > NOISY_MAX_PRIMARY_PHOTONS:
        raise CapacityError(
            f"noise model limited to {NOISY_MAX_PRIMARY_PHOTONS} primary photons, got {n}"
        )
    if input_modes is None:
        input_modes = list(range(n))
    modes = [int(x) for x in input_modes]
    if len(set(modes)) != len(modes) or len(modes) != n:
        raise InputDataError(f"need {n} distinct input modes, got {modes}")

    eta = params.eta0
    lose = 1.0 - eta
    # Per input mode: which photons survive (P primary, N noise) and with
    # what probability, after folding emission weights with loss.
    per_mode = [
        ((), params.p0 + params.p1 * lose + params.p2 * lose * lose),
        (("P",), params.p1 * eta + params.p2 * eta * lose),
        (("N",), params.p2 * eta * lose),
        (("P", "N"), params.p2 * eta * eta),
    ]
    per_mode = [(kinds, w) for kinds, w in per_mode if w > 0.0]

    weights: dict[tuple, float] = {}
    for combo in itertools.product(per_mode, repeat=n):
        size = sum(len(kinds) for kinds, _ in combo)
        if size != n:
            continue
        weight = 1.0
        for _, w in combo:
            weight *= w
        primaries = tuple(a for a, (kinds, _) in enumerate(combo) if "P" in kinds)
        noise = tuple(a for a, (kinds, _) in enumerate(combo) if "N" in kinds)
        key = (primaries, noise)
        weights[key] = weights.get(key, 0.0) + weight

    total_weight = sum(weights.values())
    if total_weight <= 0.0:
        raise DegenerateCaseError("no component yields the post-selected photon number")

    m = uu.shape[0]
    configs = output_occupations(m, n)
    probs = np.zeros(len(configs))
    for (primaries, noise), weight in weights.items():
        k = len(primaries)
        gram = np.eye(n, dtype=np.complex128)
        gram[:k, :k] = ss[np.ix_(primaries, primaries)]
        photon_modes = [modes[a] for a in primaries] + [modes[a] for a in noise]
        component = _distribution_general(uu, gram, photon_modes)
        probs += (weight / total_weight) * component.probs
    return OutputDistribution(modes=m, photons=n, configs=configs, probs=probs)


def _elementary_symmetric(values: np.ndarray, k: int) -> float:
    if k == 0:
        return 1.0
    if k > len(values):
        return 0.0
    total = 0.0
    for combo in itertools.combinations(values, k):
        total += math.prod(combo)
    return total


@dataclass(frozen=True)
class DetectionModel:
    """Pseudo-photon-number detection efficiencies per configuration.

    Either derived combinatorially from per-mode detector split
    probabilities (``splits`` row per mode, ``eta`` per-photon detection
    efficiency) or looked up from an explicitly measured ``table``.
    """

    eta: float = 1.0
    splits: np.ndarray | None = None
    table: dict | None = None

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise RangeError(f"eta must lie in (0, 1], got {self.eta}")
        if self.splits is not None:
            sp = np.asarray(self.splits, dtype=np.float64)
            if sp.ndim != 2 or sp.min() < 0.0:
                raise InputDataError("split table must be a nonnegative 2-d array")
            if np.abs(sp.sum(axis=1) - 1.0).max() > 1e-6:
                raise InputDataError("split probabilities per mode must sum to 1")
            object.__setattr__(self, "splits", sp)
        if self.table is not None:
            clean = {}
            for config, value in self.table.items():
                key = tuple(int(x) for x in config)
                if not 0.0 < float(value) <= 1.0:
                    raise InputDataError(
                        f"tabulated efficiency for {key} must lie in (0, 1]"
                    )
                clean[key] = float(value)
            object.__setattr__(self, "table", clean)

    def efficiency(self, config) -> float:
        """Probability that ``config`` is registered with full resolution."""
        key = tuple(int(x) for x in config)
        if self.table is not None:
            try:
                return self.table[key]
            except KeyError:
                raise InputDataError(f"no tabulated efficiency for {key}") from None
        splits = self.splits
        if splits is None:
            splits = np.full((len(key), 3), 1.0 / 3.0)
        if len(key) > splits.shape[0]:
            raise DimensionError(
                f"configuration has {len(key)} modes, split table {splits.shape[0]}"
            )
        value = 1.0
        for i, k in enumerate(key):
            if k == 0:
                continue
            # k photons must land in k distinct detectors, all detected
            value *= self.eta**k * math.factorial(k) * _elementary_symmetric(splits[i], k)
        return value

    def to_json(self) -> dict:
        out: dict = {"eta": self.eta}
        if self.splits is not None:
            out["splits"] = np.asarray(self.splits).tolist()
        if self.table is not None:
            out["table"] = {"-".join(str(x) for x in k): v for k, v in self.table.items()}
        return out

    @classmethod
    def from_json(cls, obj) -> "DetectionModel":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise InputDataError("detection model JSON must be an object")
        table = None
        if "table" in obj:
            table = {
                tuple(int(x) for x in key.split("-")): float(v)
                for key, v in obj["table"].items()
            }
        splits = obj.get("splits")
        return cls(
            eta=float(obj.get("eta", 1.0)),
            splits=None if splits is None else np.asarray(splits, dtype=np.float64),
            table=table,
        )


def pnr_detection_efficiencies(eta: float = 1.0, splits=None) -> DetectionModel:
    """Detection model for threshold detectors behind balanced fan-outs.

    With the default balanced three-way splits the three-photon
    configuration classes come out at 2/9 (triple), 2/3 (double+single)
    and 1 (collision-free), each times eta^3.
    """
    if splits is None:
        return DetectionModel(eta=eta)
    return DetectionModel(eta=eta, splits=np.asarray(splits, dtype=np.float64))


@dataclass(frozen=True)
class CorrectedCounts:
    """Counts corrected for detection efficiency, with standard errors."""

    distribution: OutputDistribution
    errors: np.ndarray
    corrected: np.ndarray
    total: float

    def to_json(self) -> dict:
        out = self.distribution.to_json()
        for entry, err, n in zip(out["probs"], self.errors, self.corrected):
            entry["p_err"] = float(err)
            entry["corrected_count"] = float(n)
        out["corrected_total"] = self.total
        return out


def correct_counts(raw: dict, detection: DetectionModel) -> CorrectedCounts:
    """Undo per-configuration detection efficiency and normalize.

    ``raw`` maps occupation tuples to observed counts.  Corrected counts
    are ``N_c = raw_c / P^det_c``; probabilities are normalized over the
    full configuration space of the inferred mode/photon numbers, and
    standard errors propagate Poisson fluctuations of the raw counts.
    """
    if not raw:
        raise InputDataError("counts are empty")
    keys = [tuple(int(x) for x in k) for k in raw]
    modes = len(keys[0])
    photons = sum(keys[0])
    for k in keys:
        if len(k) != modes or sum(k) != photons:
            raise InputDataError(f"inconsistent configuration {k}")
    configs = output_occupations(modes, photons)
    index = {c: i for i, c in enumerate(configs)}
    counts = np.zeros(len(configs))
    for key, value in zip(keys, raw.values()):
        if key not in index:
            raise InputDataError(f"configuration {key} is not a valid occupation")
        if value < 0:
            raise InputDataError(f"negative count for {key}")
        counts[index[key]] += float(value)
    if counts.sum() <= 0.0:
        raise InputDataError("all counts are zero")

    eff = np.array([detection.efficiency(c) for c in configs])
    bad = (eff <= 0.0) & (counts > 0.0)
    if np.any(bad):
        raise InputDataError("nonzero counts in configurations with zero efficiency")
    corrected = np.divide(counts, eff, out=np.zeros_like(counts), where=eff > 0.0)
    total = corrected.sum()
    probs = corrected / total

    var_n = np.divide(counts, eff**2, out=np.zeros_like(counts), where=eff > 0.0)
    var_p = ((1.0 - probs) ** 2 * var_n + probs**2 * (var_n.sum() - var_n)) / total**2
    dist = OutputDistribution(
        modes=modes, photons=photons, configs=configs, probs=probs
    )
    return CorrectedCounts(
        distribution=dist, errors=np.sqrt(var_p), corrected=corrected, total=float(total)
    )


def distinguishable_bunching_from_moduli(t: np.ndarray) -> np.ndarray:
    """Full-bunching probability per output mode for distinguishable photons.

    Depends only on the interferometer's squared moduli ``t``: the photons
    route independently, so mode i collects all of them with probability
    equal to the product of its row.
    """
    a = np.asarray(t, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"moduli matrix must be square, got {a.shape}")
    if a.min() < 0.0 or a.max() > 1.0 + 1e-9:
        raise InputDataError("squared moduli must lie in [0, 1]")
    return np.prod(a, axis=1)


def reconstruct_one_distinguishable_bunching(two_photon, t_col) -> np.ndarray:
    """Extend measured two-photon bunching to three photons, classically.

    A distinguishable third photon entering the interferometer joins mode
    i independently with the moduli-column probability, so the
    three-photon bunching probabilities are elementwise products.
    """
    p = np.asarray(two_photon, dtype=np.float64)
    t = np.asarray(t_col, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise DimensionError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.min() < 0.0 or t.min() < 0.0 or t.max() > 1.0 + 1e-9:
        raise InputDataError("inputs must be probabilities")
    return p * t
