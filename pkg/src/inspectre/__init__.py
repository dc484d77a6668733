"""Differentially private estimation of entropy, support size and support coverage."""

from inspectre.core import (
    DiscreteDistribution,
    Fingerprint,
    Histogram,
    SampleSet,
    build_fingerprint,
    build_histogram,
    exact_entropy,
    exact_support_coverage,
    exact_support_size,
    sample,
    sample_histogram,
    tv_distance,
)
from inspectre.coverage import (
    private_support_coverage,
    make_sgt_config,
    sgt_estimate,
    sgt_sensitivity,
    support_size_estimate,
)
from inspectre.entropy import (
    build_poly_config,
    empirical_entropy,
    miller_madow,
    poly_entropy,
    private_entropy,
)
from inspectre.errors import (
    ConfigurationError,
    EmptySampleError,
    IngestionError,
    InspectreError,
    SensitivityGuardError,
)
from inspectre.privacy import (
    PrivacyParams,
    PrivateEstimate,
    SensitivityBound,
    additive_sensitivity,
    laplace_noise,
    median_amplify,
    privatize,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DiscreteDistribution",
    "EmptySampleError",
    "Fingerprint",
    "Histogram",
    "IngestionError",
    "InspectreError",
    "PrivacyParams",
    "PrivateEstimate",
    "SampleSet",
    "SensitivityBound",
    "SensitivityGuardError",
    "additive_sensitivity",
    "build_fingerprint",
    "build_histogram",
    "build_poly_config",
    "empirical_entropy",
    "exact_entropy",
    "exact_support_coverage",
    "exact_support_size",
    "laplace_noise",
    "make_sgt_config",
    "median_amplify",
    "miller_madow",
    "poly_entropy",
    "private_entropy",
    "private_support_coverage",
    "privatize",
    "sample",
    "sample_histogram",
    "sgt_estimate",
    "sgt_sensitivity",
    "support_size_estimate",
    "tv_distance",
]
