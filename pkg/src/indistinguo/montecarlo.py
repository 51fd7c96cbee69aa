"""Random-device ensembles, finite-shot sampling, and bootstrap errors.

:func:`run_haar_ensemble` draws interferometers from the uniform (Haar)
measure and records, per draw, the bunching probability, the bunching
ratio against distinguishable photons, the count variance for the given
scenario and for distinguishable photons, and the device-independent
average-overlap lower bound.  :func:`sample_counts` turns an exact output
distribution into finite-shot counts, and :func:`bootstrap` propagates
count noise through any counts-based estimator.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import EstimatorError, IndistinguoError, InputDataError
from .interference import (
    OutputDistribution,
    distribution_from_counts,
    full_bunching_probability,
    variance_from_distribution,
)
from .matrices import haar_random_unitary, permanent
from .noise import NoiseParameters, noisy_distribution
from .states import overlaps, validate_gram

__all__ = [
    "EnsembleResult",
    "EstimateWithError",
    "run_haar_ensemble",
    "sample_counts",
    "bootstrap",
    "variance_statistic",
]

_QUANTILES = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclasses.dataclass(frozen=True)
class EnsembleResult:
    """Per-draw records and summary statistics of a random-device study.

    ``seeds[k]`` is the spawn index of draw ``k``: together with the master
    seed it reproduces that draw's device exactly, independent of how the
    run was chunked.  ``p_fb`` is the probability that all photons leave
    through one chosen output mode, averaged over the choices, so it is
    bounded by n!/n^n for every device.  ``r_fb`` divides it by the same
    device's value for fully distinguishable photons.  ``avg_overlap_lb``
    is the device-independent lower bound on the average pairwise overlap;
    it is informative (nontrivial) when it lands in (0, 1].
    """

    n_modes: int
    photons: int
    master_seed: int
    noisy: bool
    seeds: np.ndarray
    p_fb: np.ndarray
    r_fb: np.ndarray
    sigma: np.ndarray
    sigma_d: np.ndarray
    avg_overlap_lb: np.ndarray

    def __post_init__(self):
        lengths = {
            len(self.seeds), len(self.p_fb), len(self.r_fb),
            len(self.sigma), len(self.sigma_d), len(self.avg_overlap_lb),
        }
        if len(lengths) != 1 or not self.seeds.size:
            raise InputDataError("ensemble records must be equal-length and non-empty")

    @property
    def draws(self) -> int:
        return int(self.seeds.size)

    def nontrivial_fraction(self) -> float:
        """Fraction of draws whose average-overlap bound is informative."""
        lb = self.avg_overlap_lb
        return float(np.mean((lb > 0.0) & (lb <= 1.0)))

    def summary(self) -> dict:
        out = {
            "n_modes": self.n_modes,
            "photons": self.photons,
            "master_seed": self.master_seed,
            "noisy": self.noisy,
            "draws": self.draws,
            "nontrivial_lb_fraction": self.nontrivial_fraction(),
        }
        for name in ("p_fb", "r_fb", "sigma", "sigma_d", "avg_overlap_lb"):
            series = getattr(self, name)
            qs = np.quantile(series, _QUANTILES)
            out[name] = {
                "mean": float(series.mean()),
                "std": float(series.std(ddof=1)) if series.size > 1 else 0.0,
                "quantiles": {f"q{int(100 * q):02d}": float(v)
                              for q, v in zip(_QUANTILES, qs)},
            }
        return out

    def to_json(self) -> dict:
        return self.summary()


def _scenario_permanent(s: np.ndarray) -> float:
    value = permanent(s)
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise InputDataError(
            f"scenario permanent {value} is not real; the Gram matrix is invalid"
        )
    return float(value.real)


def run_haar_ensemble(
    n_modes: int,
    scenario: np.ndarray,
    draws: int,
    seed: int = 0,
    noise: NoiseParameters | None = None,
) -> EnsembleResult:
    """Study bunching and variance statistics over uniform random devices.

    Photons enter modes ``0..n-1`` of an ``n_modes``-mode device drawn
    from the Haar measure; ``scenario`` is the photons' Gram matrix.  The
    ideal path evaluates closed forms (chosen-mode bunching equals the
    Gram permanent times the product of that mode's squared amplitudes;
    the variance is affine in the pairwise overlaps), so large ensembles
    run in seconds.  With ``noise`` each draw instead post-selects the
    full noisy distribution, which is slow and meant for qualitative
    studies at modest draw counts.

    Per-draw devices come from ``SeedSequence(seed, spawn_key=(k,))``, a
    counter-based split, so results are bit-identical no matter how the
    draw range is chunked or parallelized.
    """
    s = validate_gram(scenario)
    n = s.shape[0]
    if draws < 1:
        raise InputDataError(f"draws must be >= 1, got {draws}")
    if n_modes < n:
        raise InputDataError(
            f"{n} photons need at least {n} modes, got n_modes={n_modes}"
        )
    perm_s = _scenario_permanent(s)
    delta = overlaps(s)
    input_modes = tuple(range(n))

    seeds = np.arange(draws, dtype=np.int64)
    p_fb = np.empty(draws)
    r_fb = np.empty(draws)
    sigma = np.empty(draws)
    sigma_d = np.empty(draws)
    lb = np.empty(draws)

    identity = np.eye(n)
    for k in range(draws):
        child = np.random.SeedSequence(entropy=seed, spawn_key=(int(k),))
        u = haar_random_unitary(n_modes, child)
        if noise is None:
            p = np.abs(u[:, :n]) ** 2
            chosen_mode_mean = p.prod(axis=1).mean()
            p_fb[k] = perm_s * chosen_mode_mean
            r_fb[k] = p_fb[k] / chosen_mode_mean
            q = p.T @ p
            tr = np.trace(q)
            sigma[k] = 1.0 + ((delta * q).sum() - tr) / n - tr / n
            sigma_d[k] = 1.0 - tr / n
        else:
            dist_s = noisy_distribution(u, s, noise, input_modes)
            dist_i = noisy_distribution(u, identity, noise, input_modes)
            fb_s = full_bunching_probability(dist_s)
            fb_i = full_bunching_probability(dist_i)
            p_fb[k] = fb_s / n_modes
            r_fb[k] = fb_s / fb_i
            sigma[k] = variance_from_distribution(dist_s)
            sigma_d[k] = variance_from_distribution(dist_i)
        ratio = (sigma[k] - 2.0 * sigma_d[k] + 1.0) / (1.0 - sigma_d[k])
        lb[k] = ratio * ratio / (n * (n - 1.0)) - 1.0 / (n - 1.0)

    return EnsembleResult(
        n_modes=n_modes,
        photons=n,
        master_seed=int(seed),
        noisy=noise is not None,
        seeds=seeds,
        p_fb=p_fb,
        r_fb=r_fb,
        sigma=sigma,
        sigma_d=sigma_d,
        avg_overlap_lb=lb,
    )


def sample_counts(dist: OutputDistribution, shots: int, seed: int = 0) -> dict:
    """Multinomial finite-shot counts from an exact output distribution."""
    if shots < 0:
        raise InputDataError(f"shots must be >= 0, got {shots}")
    rng = np.random.default_rng(seed)
    drawn = rng.multinomial(int(shots), dist.probs)
    return {config: int(c) for config, c in zip(dist.configs, drawn)}


@dataclasses.dataclass(frozen=True)
class EstimateWithError:
    """Point estimate with a resampling standard error."""

    mean: float
    std: float
    resamples: int
    failures: int = 0

    def to_json(self) -> dict:
        return {
            "mean": float(self.mean),
            "std": float(self.std),
            "resamples": int(self.resamples),
            "failures": int(self.failures),
        }


def bootstrap(estimator, counts: dict, resamples: int = 1000, seed: int = 0) -> EstimateWithError:
    """Propagate count noise through a counts-based estimator.

    Each resample redraws every count from a Poisson law at the observed
    value and re-runs ``estimator`` (a callable from a counts mapping to a
    float).  Individual resample failures are tolerated up to 10% of
    ``resamples``; beyond that the estimator is reported as unstable.
    """
    if resamples < 100:
        raise InputDataError(f"resamples must be >= 100, got {resamples}")
    configs = list(counts.keys())
    values = np.array([counts[c] for c in configs], dtype=np.int64)
    if np.any(values < 0):
        raise InputDataError("counts must be non-negative")
    rng = np.random.default_rng(seed)
    drawn = rng.poisson(values, size=(resamples, values.size))
    results = []
    failures = 0
    for row in drawn:
        try:
            results.append(float(estimator(dict(zip(configs, (int(v) for v in row))))))
        except (IndistinguoError, ValueError, ZeroDivisionError):
            failures += 1
    if failures > 0.1 * resamples:
        raise EstimatorError(
            f"estimator failed on {failures}/{resamples} resamples; "
            "the statistic is unstable at these counts"
        )
    arr = np.asarray(results)
    return EstimateWithError(
        mean=float(arr.mean()),
        std=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        resamples=resamples,
        failures=failures,
    )


def variance_statistic(
    counts: dict,
    modes: int,
    photons: int,
    *,
    resamples: int = 1000,
    seed: int = 0,
) -> EstimateWithError:
    """Mode-averaged count variance with a bootstrap standard error.

    ``mean`` is the plug-in estimate from the normalized counts (not the
    bootstrap mean); ``std`` comes from Poisson resampling of the counts.
    """

    def estimate(c: dict) -> float:
        return variance_from_distribution(distribution_from_counts(c, modes, photons))

    point = estimate(counts)
    noise = bootstrap(estimate, counts, resamples=resamples, seed=seed)
    return EstimateWithError(
        mean=point, std=noise.std, resamples=resamples, failures=noise.failures
    )
