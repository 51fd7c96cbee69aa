"""Bundled reference datasets from a three-photon characterization campaign.

The package ships a small data directory with measured values from a
reconfigurable photonic processor driven through 23 random 3x3
transformations plus a balanced three-mode splitter.  These loaders parse
the bundled files into plain Python/numpy objects so tests and examples can
compare simulated statistics against measured ones without any network or
filesystem setup.

All loaders return fresh objects; mutating a returned value never affects
subsequent calls.
"""

from __future__ import annotations

import csv
import json
from importlib import resources

import numpy as np

from .noise import DetectionModel
from .states import gram_from_overlaps

__all__ = [
    "detection_model",
    "random_device_bunching",
    "tritter_reconstruction",
    "scenario_a",
    "scenario_b",
    "scenario_c",
]

#: Measured pairwise overlaps for the three bundled input scenarios, in the
#: order (ab, ac, bc).  Scenario A is three nearly indistinguishable photons,
#: scenario B has photon b nearly orthogonal to the other two, and scenario C
#: keeps only the (a, c) overlap with photon b fully distinguishable.
SCENARIO_OVERLAPS = {
    "A": (0.875, 0.874, 0.848),
    "B": (0.103, 0.881, 0.107),
    "C": (0.0, 0.831, 0.0),
}


def _data_text(name: str) -> str:
    return (resources.files(__package__) / "data" / name).read_text(encoding="utf-8")


def detection_model() -> DetectionModel:
    """Measured per-configuration efficiencies of the cascaded-splitter counters.

    Three-way splitting into threshold detectors cannot register all photons
    of a bunched configuration with unit probability; this table holds the
    measured retrieval efficiency for every three-photon output pattern.
    """
    return DetectionModel.from_json(json.loads(_data_text("detection_efficiencies.json")))


def random_device_bunching(scenario: str = "A") -> list[dict]:
    """Measured bunching statistics for the 23 random 3x3 devices.

    ``scenario`` selects the input-state preparation: ``"A"`` (three nearly
    indistinguishable photons) or ``"C"`` (photon b fully distinguishable,
    reconstructed from two-photon coincidences).

    Returns a list of 23 dicts, one per device, keyed by column name; every
    value carries a matching ``*_err`` entry with its one-sigma uncertainty.
    Scenario A rows hold the pooled bunching ratio ``r_fb``, the normalized
    output variance ``sigma``, the average-overlap lower bound
    ``avg_overlap_lb`` and, per bunched configuration, raw event counts in
    thousands, the corrected probability ``p_*`` and the per-configuration
    ratio to the distinguishable reference.  Scenario C rows hold the pooled
    ratio, raw two-photon counts in tens of thousands, the loss-scaled
    probabilities ``pt_*`` and the per-configuration three-photon ratios.
    """
    key = scenario.strip().upper()
    if key not in ("A", "C"):
        raise ValueError(f"no bundled bunching table for scenario {scenario!r}")
    name = f"bunching_scenario_{key.lower()}.csv"
    rows = []
    for raw in csv.DictReader(_data_text(name).splitlines()):
        row: dict = {"device": int(raw.pop("device"))}
        row.update((k, float(v)) for k, v in raw.items())
        rows.append(row)
    return rows


def tritter_reconstruction() -> dict:
    """Reconstructed balanced-splitter transformation and its uncertainties.

    Returns a dict with ``moduli``, ``moduli_err``, ``phases`` and
    ``phases_err`` as (3, 3) float arrays in the canonical gauge (first row
    and column real), plus ``matrix``: the complex transformation assembled
    as ``moduli * exp(1j * phases)``.  The assembled matrix is close to, but
    not exactly, unitary because the entries are measured values.
    """
    obj = json.loads(_data_text("tritter_reconstruction.json"))
    out = {k: np.asarray(v, dtype=np.float64) for k, v in obj.items()}
    out["matrix"] = out["moduli"] * np.exp(1j * out["phases"])
    return out


def scenario_a() -> np.ndarray:
    """Gram matrix of the high-indistinguishability input scenario."""
    return gram_from_overlaps(*SCENARIO_OVERLAPS["A"])


def scenario_b() -> np.ndarray:
    """Gram matrix with photon b nearly orthogonal to photons a and c."""
    return gram_from_overlaps(*SCENARIO_OVERLAPS["B"])


def scenario_c() -> np.ndarray:
    """Gram matrix with photon b fully distinguishable from photons a and c."""
    return gram_from_overlaps(*SCENARIO_OVERLAPS["C"])
