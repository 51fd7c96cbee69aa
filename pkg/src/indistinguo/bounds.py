"""Certification formulas built on the mean photon-number variance.

Given the measured variance of a multiport's output photon numbers,
these functions extract the average pairwise overlap (balanced
interferometers), lower-bound the minimum pairwise overlap (three photons,
balanced), and lower-bound the average overlap for an arbitrary, even
uncharacterized, interferometer.  The cyclic-interferometer closed form
used for triad-phase estimation lives here too.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import DimensionError, RangeError

__all__ = [
    "BoundReport",
    "RangeWarning",
    "sigma_max",
    "average_overlap_from_balanced",
    "min_overlap_lower_bounds",
    "average_overlap_sdi_bound",
    "cyclic_probabilities",
    "CYCLIC_INPUT_MODES",
    "CYCLIC_PLUS_SET",
    "CYCLIC_MINUS_SET",
]


class RangeWarning(UserWarning):
    """A noise-driven estimate fell outside its physical range."""


# Tolerated excursion outside [0, 1] before an inverted estimate warns.
_RANGE_EPS = 0.05


@dataclass(frozen=True)
class BoundReport:
    """A certified lower bound together with its validity status.

    ``trivial`` is set when the bound carries no information: value at or
    below zero, above one, or the formula's validity condition failed.
    """

    formula: str
    value: float
    trivial: bool
    inputs: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "formula": self.formula,
            "value": self.value,
            "trivial": self.trivial,
            "inputs": dict(self.inputs),
        }


def sigma_max(n: int) -> float:
    """Largest possible mean variance: balanced interferometer, identical photons."""
    if n < 1:
        raise DimensionError(f"photon number must be >= 1, got {n}")
    return 2.0 - 2.0 / n


def average_overlap_from_balanced(sigma: float, n: int) -> float:
    """Average pairwise overlap from the variance of a balanced interferometer.

    Inverts the balanced-case variance formula; only meaningful when the
    caller's interferometer really is balanced.  Noisy input can push the
    result slightly outside [0, 1]; excursions beyond ``_RANGE_EPS`` raise
    a :class:`RangeWarning`.
    """
    if n < 2:
        raise DimensionError(f"need at least two photons, got n={n}")
    value = (sigma - 1.0 + 1.0 / n) * n / (n - 1.0)
    if not -_RANGE_EPS <= value <= 1.0 + _RANGE_EPS:
        warnings.warn(
            f"average overlap estimate {value:.4f} outside [0, 1]; "
            "variance input inconsistent with a balanced interferometer",
            RangeWarning,
            stacklevel=2,
        )
    return float(value)


def min_overlap_lower_bounds(sigma: float) -> tuple[BoundReport, BoundReport]:
    """Lower bounds on every pairwise overlap, three photons, balanced tritter.

    Returns (linear, product) reports.  The linear bound is (9/2) sigma - 5;
    the product bound ((9/4) sigma - 2)^2 requires sigma > 8/9 to be valid
    and is the better of the two on the nontrivial range.
    """
    inputs = {"sigma": float(sigma)}
    lin = 4.5 * sigma - 5.0
    linear = BoundReport(
        formula="min-overlap-linear",
        value=float(lin),
        trivial=not 0.0 < lin <= 1.0,
        inputs=inputs,
    )
    root = 2.25 * sigma - 2.0
    if root >= 0.0:
        prod = root * root
        prod_trivial = not 0.0 < prod <= 1.0
    else:
        # Below sigma = 8/9 the squaring step is unsound; no information.
        prod = 0.0
        prod_trivial = True
    product = BoundReport(
        formula="min-overlap-product",
        value=float(prod),
        trivial=prod_trivial,
        inputs=inputs,
    )
    return linear, product


def average_overlap_sdi_bound(sigma: float, sigma_d: float, n: int) -> BoundReport:
    """Interferometer-independent lower bound on the average overlap.

    Needs only the measured variance ``sigma`` and the variance ``sigma_d``
    the same (possibly unknown) interferometer produces for fully
    distinguishable photons.  Valid for any unitary; trivial when the
    value is not in (0, 1].
    """
    if n < 2:
        raise DimensionError(f"need at least two photons, got n={n}")
    if sigma_d >= 1.0:
        raise RangeError(
            f"distinguishable-photon variance must be < 1, got {sigma_d}"
        )
    ratio = (sigma - 2.0 * sigma_d + 1.0) / (1.0 - sigma_d)
    value = ratio * ratio / (n * (n - 1.0)) - 1.0 / (n - 1.0)
    return BoundReport(
        formula="average-overlap-sdi",
        value=float(value),
        trivial=not 0.0 < value <= 1.0,
        inputs={"sigma": float(sigma), "sigma_d": float(sigma_d), "n": int(n)},
    )


# Cyclic six-mode interferometer: photons enter these ports (0-based) and
# the collision-free outputs split into two sets whose probabilities move
# in antiphase as the internal phase alpha is scanned.
CYCLIC_INPUT_MODES = (0, 2, 4)
CYCLIC_PLUS_SET = ((0, 2, 4), (0, 3, 5), (1, 2, 5), (1, 3, 4))
CYCLIC_MINUS_SET = ((0, 2, 5), (0, 3, 4), (1, 2, 4), (1, 3, 5))


def cyclic_probabilities(
    delta_ab: float, delta_bc: float, delta_ac: float, phi: float, alpha: float
) -> tuple[float, float]:
    """Per-configuration probabilities for the two cyclic output sets.

    Each configuration in ``CYCLIC_PLUS_SET`` has probability p_plus, each
    in ``CYCLIC_MINUS_SET`` p_minus; the contrast is set by the geometric
    mean of the three pairwise overlaps and oscillates with alpha offset
    by the Gram matrix phase phi.
    """
    for name, d in (("delta_ab", delta_ab), ("delta_bc", delta_bc), ("delta_ac", delta_ac)):
        if not 0.0 <= d <= 1.0:
            raise RangeError(f"{name} must lie in [0, 1], got {d}")
    amp = math.sqrt(delta_ab * delta_bc * delta_ac) * math.cos(alpha + phi)
    return (1.0 + amp) / 32.0, (1.0 - amp) / 32.0
