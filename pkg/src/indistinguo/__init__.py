"""Multiphoton interference with partially distinguishable photons.

Simulate photon-counting statistics of linear-optical devices, compute
device-independent witnesses of photon indistinguishability, model realistic
source and detection noise, and reconstruct device or state parameters from
measured counts.  The command-line entry point lives in
:mod:`indistinguo.cli`; bundled measured datasets in
:mod:`indistinguo.fixtures`.

Heavy kernels run through numba when available; set the environment variable
``INDISTINGUO_BACKEND=numpy`` to force the pure-numpy fallback (see
:func:`indistinguo.active_backend`).
"""

from ._backend import active_backend, numba_available
from .errors import (
    CapacityError,
    DegenerateCaseError,
    DimensionError,
    EstimatorError,
    IdentifiabilityError,
    IndistinguoError,
    InputDataError,
    InvalidScenarioError,
    RangeError,
    ReconstructionError,
)
from .matrices import (
    cyclic_unitary,
    fourier_unitary,
    haar_random_unitary,
    permanent,
    permanent_naive,
    stochastic_moduli,
    validate_unitary,
)
from .states import (
    average_overlap,
    gram_from_overlaps,
    hom_to_overlap,
    overlaps,
    realize_basis,
    validate_gram,
)
from .interference import (
    OutputDistribution,
    bunching_ratio,
    distribution_from_counts,
    full_bunching_per_mode,
    full_bunching_probability,
    oracle_distribution,
    output_distribution,
    two_mode_correlator,
    variance_closed_form,
    variance_distinguishable,
    variance_from_distribution,
)
from .bounds import (
    BoundReport,
    average_overlap_from_balanced,
    average_overlap_sdi_bound,
    cyclic_probabilities,
    min_overlap_lower_bounds,
    sigma_max,
)
from .noise import (
    CorrectedCounts,
    DetectionModel,
    NoiseParameters,
    correct_counts,
    emission_probabilities,
    noisy_distribution,
    pnr_detection_efficiencies,
)
from .reconstruct import (
    OverlapEstimate,
    PhaseEstimate,
    RatioObservation,
    ReconstructionResult,
    VarianceObservation,
    amplitude_fidelity,
    estimate_gram_phase_distribution,
    estimate_gram_phase_fit,
    fidelity,
    gauge_fix_phases,
    predicted_ratio,
    reconstruct_overlaps,
    reconstruct_unitary,
    tvd,
)
from .montecarlo import (
    EnsembleResult,
    EstimateWithError,
    bootstrap,
    run_haar_ensemble,
    sample_counts,
    variance_statistic,
)
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    "numba_available",
    # errors
    "IndistinguoError",
    "DimensionError",
    "CapacityError",
    "InputDataError",
    "InvalidScenarioError",
    "RangeError",
    "DegenerateCaseError",
    "IdentifiabilityError",
    "ReconstructionError",
    "EstimatorError",
    # matrices
    "validate_unitary",
    "permanent",
    "permanent_naive",
    "haar_random_unitary",
    "fourier_unitary",
    "cyclic_unitary",
    "stochastic_moduli",
    # states
    "validate_gram",
    "gram_from_overlaps",
    "overlaps",
    "average_overlap",
    "hom_to_overlap",
    "realize_basis",
    # interference
    "OutputDistribution",
    "output_distribution",
    "oracle_distribution",
    "distribution_from_counts",
    "full_bunching_per_mode",
    "full_bunching_probability",
    "bunching_ratio",
    "two_mode_correlator",
    "variance_from_distribution",
    "variance_closed_form",
    "variance_distinguishable",
    # bounds
    "BoundReport",
    "sigma_max",
    "average_overlap_from_balanced",
    "min_overlap_lower_bounds",
    "average_overlap_sdi_bound",
    "cyclic_probabilities",
    # noise
    "NoiseParameters",
    "DetectionModel",
    "CorrectedCounts",
    "emission_probabilities",
    "noisy_distribution",
    "pnr_detection_efficiencies",
    "correct_counts",
    # reconstruct
    "VarianceObservation",
    "OverlapEstimate",
    "RatioObservation",
    "ReconstructionResult",
    "PhaseEstimate",
    "reconstruct_overlaps",
    "reconstruct_unitary",
    "predicted_ratio",
    "gauge_fix_phases",
    "estimate_gram_phase_fit",
    "estimate_gram_phase_distribution",
    "fidelity",
    "amplitude_fidelity",
    "tvd",
    # montecarlo
    "EnsembleResult",
    "EstimateWithError",
    "run_haar_ensemble",
    "sample_counts",
    "bootstrap",
    "variance_statistic",
    # data
    "fixtures",
]
