"""Extremal index estimation from disjoint and sliding block maxima."""

from eix.core import BlockScheme, PseudoSample, TieWarning, block_maxima, pseudo_sample, ranks
from eix.estimators import (
    DegenerateSeriesError,
    EstimateReport,
    EstimatorVariant,
    estimate,
    oracle_estimate,
)
from eix.inference import (
    Analysis,
    ConfidenceInterval,
    VarianceReport,
    analyze,
    bias_corrected,
    confidence_interval,
    variance_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "BlockScheme",
    "ConfidenceInterval",
    "DegenerateSeriesError",
    "EstimateReport",
    "EstimatorVariant",
    "PseudoSample",
    "TieWarning",
    "VarianceReport",
    "analyze",
    "bias_corrected",
    "block_maxima",
    "confidence_interval",
    "estimate",
    "oracle_estimate",
    "pseudo_sample",
    "ranks",
    "variance_estimate",
]
