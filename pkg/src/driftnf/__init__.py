"""driftnf: normal forms and exponential stability estimates for
nearly-integrable vector fields with dissipation and non-resonant frequency.
"""
from .errors import (DimensionMismatch, ExactResonance, NonZeroAverage,
                     PoleEncountered, PoleInsideDomain, PotentialMismatch,
                     ProblemParseError, ResonantDomain)
from .poly import ActionRational, GaussianRational, Poly, rational_antiderivative
from .series import (FourierMode, FrequencyMap, GradedKey, PoissonSeries,
                     solve_homological, weighted_norm, weighted_norm_vector)
from .literals import format_series, parse_rational, parse_series

__all__ = [
    "ActionRational", "GaussianRational", "Poly", "rational_antiderivative",
    "FourierMode", "FrequencyMap", "GradedKey", "PoissonSeries",
    "solve_homological", "weighted_norm", "weighted_norm_vector",
    "format_series", "parse_rational", "parse_series",
    "DimensionMismatch", "ExactResonance", "NonZeroAverage",
    "PoleEncountered", "PoleInsideDomain", "PotentialMismatch",
    "ProblemParseError", "ResonantDomain",
]

__version__ = "0.1.0"
