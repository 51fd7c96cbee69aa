"""File formats and atomic writers shared by the library and the CLI.

Conventions:

* output configurations are dash-joined occupations, e.g. ``"3-0-0"``;
* counts files are CSV with header ``config,count``;
* variance observations are CSV ``unitary_id,sigma,sigma_var`` plus a JSON
  file mapping each ``unitary_id`` to its matrix of squared transfer moduli;
* two-photon ratio observations are CSV ``m,n,i,j,R,err``;
* parity-grouped phase-scan counts are CSV ``alpha,set,counts`` with ``set``
  in ``plus``/``minus`` (duplicate rows accumulate);
* every writer goes through a temp file and an atomic rename, so readers
  never observe a partial file.

All readers raise :class:`InputDataError` naming the file and line of the
first malformed row.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .errors import InputDataError
from .interference import OutputDistribution
from .matrices import (
    cyclic_unitary,
    fourier_unitary,
    haar_random_unitary,
    matrix_from_json,
    validate_unitary,
)
from .montecarlo import EnsembleResult
from .noise import DetectionModel, NoiseParameters
from .reconstruct import RatioObservation, VarianceObservation
from .states import scenario_from_json

__all__ = [
    "atomic_write_text",
    "write_json",
    "read_json",
    "config_key",
    "parse_config_key",
    "write_counts_csv",
    "read_counts_csv",
    "write_distribution",
    "read_distribution",
    "write_variance_observations",
    "read_variance_observations",
    "write_ratio_observations",
    "read_ratio_observations",
    "write_cyclic_counts",
    "read_cyclic_counts",
    "write_ensemble_csv",
    "write_histogram_csv",
    "parse_unitary_spec",
    "read_scenario",
    "read_noise",
    "read_detection_model",
]


# ---------------------------------------------------------------------------
# Atomic primitives
# ---------------------------------------------------------------------------


def atomic_write_text(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    """Deterministic JSON dump: sorted keys, fixed layout, atomic write."""
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str):
    try:
        with open(path) as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# Output configurations and count tables
# ---------------------------------------------------------------------------


def config_key(config) -> str:
    """Dash-joined occupation list, e.g. (3, 0, 0) -> ``"3-0-0"``."""
    return "-".join(str(int(c)) for c in config)


def parse_config_key(text: str) -> tuple[int, ...]:
    try:
        config = tuple(int(part) for part in text.strip().split("-"))
    except ValueError as exc:
        raise InputDataError(f"bad output configuration {text!r}") from exc
    if not config or any(c < 0 for c in config):
        raise InputDataError(f"bad output configuration {text!r}")
    return config


def write_counts_csv(path: str, counts: dict) -> None:
    lines = ["config,count"]
    for config in sorted(counts, reverse=True):
        lines.append(f"{config_key(config)},{int(counts[config])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_counts_csv(path: str) -> dict:
    """Counts table keyed by occupation tuple; raises naming bad lines."""
    counts: dict = {}
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not any(row for row in rows if any(cell.strip() for cell in row)):
        raise InputDataError(f"{path}: no count rows found")
    for lineno, row in enumerate(rows, start=1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "config":
            continue
        if len(row) != 2:
            raise InputDataError(
                f"{path}:{lineno}: expected 'config,count', got {row!r}"
            )
        config = _parse_at(path, lineno, parse_config_key, row[0])
        count = _parse_at(path, lineno, _non_negative_int, row[1])
        counts[config] = counts.get(config, 0) + count
    if not counts:
        raise InputDataError(f"{path}: no count rows found")
    return counts


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise ValueError("negative count")
    return value


def _parse_at(path: str, lineno: int, parser, text: str):
    try:
        return parser(text.strip())
    except (ValueError, InputDataError) as exc:
        raise InputDataError(f"{path}:{lineno}: {exc}") from exc


def write_distribution(path: str, dist: OutputDistribution) -> None:
    write_json(path, dist.to_json())


def read_distribution(path: str) -> OutputDistribution:
    return OutputDistribution.from_json(read_json(path))


# ---------------------------------------------------------------------------
# Observation tables for the inverse problems
# ---------------------------------------------------------------------------


def write_variance_observations(csv_path: str, moduli_path: str, observations) -> None:
    """Write the sigma table and the per-unitary moduli map side by side."""
    lines = ["unitary_id,sigma,sigma_var"]
    moduli = {}
    for k, obs in enumerate(observations):
        uid = f"u{k}"
        lines.append(f"{uid},{obs.sigma!r},{obs.variance!r}")
        moduli[uid] = np.asarray(obs.moduli).tolist()
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    write_json(moduli_path, moduli)


def read_variance_observations(csv_path: str, moduli_path: str) -> list:
    """Pair the sigma table with its per-unitary moduli map."""
    moduli_map = read_json(moduli_path)
    if not isinstance(moduli_map, dict):
        raise InputDataError(
            f"{moduli_path}: expected an object mapping unitary_id to moduli"
        )
    observations = []
    with open(csv_path, newline="") as handle:
        rows = list(csv.reader(handle))
    for lineno, row in enumerate(rows, start=1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "unitary_id":
            continue
        if len(row) != 3:
            raise InputDataError(
                f"{csv_path}:{lineno}: expected 'unitary_id,sigma,sigma_var', got {row!r}"
            )
        uid = row[0].strip()
        if uid not in moduli_map:
            raise InputDataError(
                f"{csv_path}:{lineno}: unitary_id {uid!r} missing from {moduli_path}"
            )
        sigma = _parse_at(csv_path, lineno, float, row[1])
        variance = _parse_at(csv_path, lineno, float, row[2])
        try:
            observations.append(
                VarianceObservation(np.asarray(moduli_map[uid], dtype=np.float64),
                                    sigma, variance)
            )
        except (InputDataError, ValueError) as exc:
            raise InputDataError(f"{csv_path}:{lineno}: {exc}") from exc
    if not observations:
        raise InputDataError(f"{csv_path}: no observation rows found")
    return observations


def write_ratio_observations(path: str, observations) -> None:
    lines = ["m,n,i,j,R,err"]
    for o in observations:
        lines.append(f"{o.m},{o.n},{o.i},{o.j},{o.ratio!r},{o.error!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_ratio_observations(path: str) -> list:
    observations = []
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    for lineno, row in enumerate(rows, start=1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "m":
            continue
        if len(row) != 6:
            raise InputDataError(
                f"{path}:{lineno}: expected 'm,n,i,j,R,err', got {row!r}"
            )
        m, n, i, j = (_parse_at(path, lineno, int, cell) for cell in row[:4])
        ratio = _parse_at(path, lineno, float, row[4])
        err = _parse_at(path, lineno, float, row[5])
        try:
            observations.append(RatioObservation(m, n, i, j, ratio, err))
        except InputDataError as exc:
            raise InputDataError(f"{path}:{lineno}: {exc}") from exc
    if not observations:
        raise InputDataError(f"{path}: no observation rows found")
    return observations


_CYCLIC_SET_NAMES = {"plus": "plus", "+": "plus", "minus": "minus", "-": "minus"}


def write_cyclic_counts(path: str, alphas, plus_counts, minus_counts) -> None:
    lines = ["alpha,set,counts"]
    for a, p, m in zip(alphas, plus_counts, minus_counts):
        lines.append(f"{float(a)!r},plus,{int(p)}")
        lines.append(f"{float(a)!r},minus,{int(m)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_cyclic_counts(path: str):
    """Parity-grouped phase-scan counts -> (alphas, plus, minus) arrays."""
    table: dict[float, dict[str, int]] = {}
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    for lineno, row in enumerate(rows, start=1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "alpha":
            continue
        if len(row) != 3:
            raise InputDataError(
                f"{path}:{lineno}: expected 'alpha,set,counts', got {row!r}"
            )
        alpha = _parse_at(path, lineno, float, row[0])
        label = row[1].strip().lower()
        if label not in _CYCLIC_SET_NAMES:
            raise InputDataError(
                f"{path}:{lineno}: set must be 'plus' or 'minus', got {row[1]!r}"
            )
        count = _parse_at(path, lineno, _non_negative_int, row[2])
        bucket = table.setdefault(alpha, {"plus": 0, "minus": 0, "_seen": 0})
        key = _CYCLIC_SET_NAMES[label]
        bucket[key] += count
        bucket["_seen"] |= 1 if key == "plus" else 2
    if not table:
        raise InputDataError(f"{path}: no count rows found")
    alphas = sorted(table)
    for a in alphas:
        if table[a]["_seen"] != 3:
            raise InputDataError(
                f"{path}: alpha={a} is missing its "
                f"{'plus' if table[a]['_seen'] == 2 else 'minus'} counts"
            )
    return (
        np.array(alphas, dtype=np.float64),
        np.array([table[a]["plus"] for a in alphas], dtype=np.float64),
        np.array([table[a]["minus"] for a in alphas], dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# Ensemble and histogram emission
# ---------------------------------------------------------------------------


def write_ensemble_csv(path: str, result: EnsembleResult) -> None:
    """One row per draw: seed and the five recorded statistics."""
    lines = ["seed,p_fb,r_fb,sigma,sigma_d,avg_overlap_lb"]
    for k in range(result.draws):
        lines.append(
            f"{int(result.seeds[k])},{float(result.p_fb[k])!r},{float(result.r_fb[k])!r},"
            f"{float(result.sigma[k])!r},{float(result.sigma_d[k])!r},"
            f"{float(result.avg_overlap_lb[k])!r}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_histogram_csv(path: str, values, bins) -> None:
    """Plot-ready histogram: ``bin_left,bin_right,count`` rows."""
    arr = np.asarray(values, dtype=np.float64)
    try:
        counts, edges = np.histogram(arr, bins=bins)
    except ValueError:
        # Non-positive-width data range (e.g. a constant series): pad by
        # half a unit on each side, mirroring numpy's single-value rule.
        lo, hi = float(arr.min()), float(arr.max())
        edges = np.linspace(lo - 0.5, hi + 0.5, int(bins) + 1)
        counts, edges = np.histogram(arr, bins=edges)
    lines = ["bin_left,bin_right,count"]
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        lines.append(f"{float(lo)!r},{float(hi)!r},{int(c)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Input object loaders
# ---------------------------------------------------------------------------


def parse_unitary_spec(text: str) -> np.ndarray:
    """Build a device matrix from a builder string or a JSON matrix file.

    Builders: ``fourier:N``, ``cyclic:alpha=X``, ``identity:N``,
    ``haar:N:seed=K`` (seed defaults to 0).  Anything else is treated as a
    path to a JSON matrix file.
    """
    head, _, rest = text.partition(":")
    builder = head.strip().lower()
    try:
        if builder == "fourier":
            return fourier_unitary(int(rest))
        if builder == "identity":
            return np.eye(int(rest), dtype=np.complex128)
        if builder == "cyclic":
            key, _, value = rest.partition("=")
            if key.strip().lower() != "alpha":
                raise InputDataError(
                    f"cyclic builder takes alpha=<float>, got {rest!r}"
                )
            return cyclic_unitary(float(value))
        if builder == "haar":
            size, _, seedpart = rest.partition(":")
            seed = 0
            if seedpart:
                key, _, value = seedpart.partition("=")
                if key.strip().lower() != "seed":
                    raise InputDataError(
                        f"haar builder takes haar:N:seed=K, got {text!r}"
                    )
                seed = int(value)
            return haar_random_unitary(int(size), seed)
    except ValueError as exc:
        raise InputDataError(f"bad unitary spec {text!r}: {exc}") from exc
    if not os.path.exists(text):
        raise InputDataError(
            f"unitary spec {text!r} is neither a known builder "
            "(fourier/cyclic/identity/haar) nor an existing file"
        )
    return validate_unitary(matrix_from_json(read_json(text)))


def read_scenario(path: str) -> np.ndarray:
    return scenario_from_json(read_json(path))


def read_noise(path: str) -> NoiseParameters:
    return NoiseParameters.from_json(read_json(path))


def read_detection_model(path: str) -> DetectionModel:
    return DetectionModel.from_json(read_json(path))
