"""Variance estimation, bias reduction and confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Dict, List, Optional, Tuple

import numpy as np

from eix import core
from eix.estimators import (
    DegenerateSeriesError,
    EstimatorVariant,
    check_block_length,
)

#: sigma2_dj - sigma2_sl = SLIDING_SHIFT / theta**2
SLIDING_SHIFT = 3.0 - 4.0 * math.log(2.0)


class Prepared:
    """A validated series with its sorted copy and per-observation ranks.

    Sorting dominates the cost of every estimator, so repeated evaluations
    over many block lengths share one instance.
    """

    def __init__(self, series):
        self.x = core.as_series(series, min_length=2)
        self.n = self.x.size
        self.sorted = np.sort(self.x)
        self._counts: Optional[np.ndarray] = None
        self._maxima_counts: Dict[Tuple[int, str], np.ndarray] = {}

    @property
    def counts(self) -> np.ndarray:
        """``n * F_n(X_s)`` for every observation, as integers."""
        if self._counts is None:
            self._counts = core.ecdf_counts(self.sorted, self.x)
        return self._counts

    def maxima_counts(self, b: int, mode: str) -> np.ndarray:
        """``n * F_n(M)`` for the block maxima of length ``b``."""
        key = (b, mode)
        if key not in self._maxima_counts:
            m = core._maxima(self.x, b, mode)
            self._maxima_counts[key] = core.ecdf_counts(self.sorted, m)
        return self._maxima_counts[key]

    def t_hat(self, b: int, mode: str, kind: str, lbo: bool = False) -> float:
        c = self.maxima_counts(b, mode)
        n = self.n
        f = (c - b) / (n - b) if lbo else c / n
        return float(np.mean(core._transform(f, b, kind, n, "leave_block_out" if lbo else "full")))


@dataclass(frozen=True)
class VarianceReport:
    """Estimated asymptotic variances for block length ``b``.

    ``sigma2_*`` estimate the variance of ``sqrt(k) (T_hat - 1/theta)``;
    ``tau2_* = theta**4 * sigma2_*`` that of ``sqrt(k) theta_hat``. Both use
    the unconstrained ``B`` estimates ``theta_dj`` and ``theta_sl``.
    ``sigma2_sl`` and ``tau2_sl`` can be negative in small samples.
    """

    sigma2_dj: float
    sigma2_sl: float
    tau2_dj: float
    tau2_sl: float
    theta_dj: float
    theta_sl: float
    k: int
    b: int
    b_hat: np.ndarray = field(repr=False)


def variance_estimate(series, b: int) -> VarianceReport:
    """Estimate the asymptotic variances of the disjoint and sliding ``B`` estimators.

    The disjoint variance is the mean square of the block contributions

        B_j = Z_j + sum_{s in I_j} k^-1 sum_i 1(U_s > N_i) - 2 T

    with ``U_s = F_n(X_s)`` and ``N_i = F_n(M_i)``; the sliding variance
    follows by subtracting ``(3 - 4 log 2) / theta_sl**2``.
    """
    prep = series if isinstance(series, Prepared) else Prepared(series)
    check_block_length(b, prep.n)
    return _variance(prep, b)


def _variance(prep: Prepared, b: int) -> VarianceReport:
    n = prep.n
    k = n // b
    cm = prep.maxima_counts(b, "disjoint")
    z = b * (1.0 - cm / n)
    t_dj = float(np.mean(z))
    t_sl = float(np.mean(b * (1.0 - prep.maxima_counts(b, "sliding") / n)))
    if not (t_dj > 0 and t_sl > 0):
        raise DegenerateSeriesError("all pseudo-observations are zero; variance undefined")
    # ranks compared as integer counts: U_s > N_i  <=>  count(X_s) > count(M_i)
    below = np.searchsorted(np.sort(cm), prep.counts[: k * b], side="left")
    inner = below.reshape(k, b).sum(axis=1) / k
    b_hat = z + inner - 2.0 * t_dj
    s2_dj = float(np.mean(b_hat**2))
    th_dj, th_sl = 1.0 / t_dj, 1.0 / t_sl
    s2_sl = s2_dj - SLIDING_SHIFT * t_sl**2
    return VarianceReport(s2_dj, s2_sl, th_dj**4 * s2_dj, th_sl**4 * s2_sl, th_dj, th_sl, k, b, b_hat)


def bias_corrected(theta: float, sigma2: float, k: int) -> float:
    """Second-order bias reduction ``theta - theta/k - theta**3 * sigma2 / k``.

    >>> round(bias_corrected(0.5, 4.0, 100), 12)
    0.49
    """
    return theta - theta / k - theta**3 * sigma2 / k


def normal_quantile(p: float) -> float:
    return NormalDist().inv_cdf(p)


@dataclass(frozen=True)
class ConfidenceInterval:
    level: float
    lo: float
    hi: float
    clipped: bool = False

    def covers(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def confidence_interval(theta: float, tau2: float, k: int, level: float = 0.95, clip: bool = False) -> ConfidenceInterval:
    """Normal interval ``theta -/+ u_{(1+level)/2} * sqrt(tau2 / k)``.

    With ``clip=True`` the interval is intersected with [0, 1] and ``clipped``
    records whether that changed it.
    """
    if not 0 < level < 1:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    if tau2 < 0:
        raise ValueError(f"tau2 must be nonnegative, got {tau2}")
    half = normal_quantile(0.5 + level / 2) * math.sqrt(tau2 / k)
    lo, hi = theta - half, theta + half
    clipped = False
    if clip:
        clo, chi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
        clipped = (clo, chi) != (lo, hi)
        lo, hi = clo, chi
    return ConfidenceInterval(level, lo, hi, clipped)


@dataclass(frozen=True)
class Analysis:
    """Everything reported for one (series, b, variant) run."""

    theta: float
    theta_bc: float
    theta_raw: float
    sigma2_dj: float
    sigma2_sl: float
    tau2: float
    ci: ConfidenceInterval
    k: int
    b: int
    n: int
    variant: EstimatorVariant
    bias_correct: bool
    warnings: List[str]

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "theta_bc": self.theta_bc,
            "theta_raw": self.theta_raw,
            "sigma2_dj": self.sigma2_dj,
            "sigma2_sl": self.sigma2_sl,
            "tau2": self.tau2,
            "ci": [self.ci.lo, self.ci.hi],
            "level": self.ci.level,
            "k": self.k,
            "b": self.b,
            "n": self.n,
            "estimator": self.variant.label,
            "bias_correct": self.bias_correct,
            "warnings": list(self.warnings),
        }


def clamp_unit(theta: float) -> float:
    return min(max(theta, 0.0), 1.0)


def analyze(
    series,
    b: int,
    variant: EstimatorVariant = EstimatorVariant(),
    level: float = 0.95,
    bias_correct: bool = True,
) -> Analysis:
    """Point estimate, bias-reduced estimate, variances and a confidence interval.

    The reported ``theta`` is the bias-reduced estimate when ``bias_correct``
    is set, the plain one otherwise, clipped to [0, 1]; the interval is
    centred on it and uses ``tau2`` (floored at zero) of the matching block
    layout. Oracle variants are not supported here.
    """
    if variant.cdf_mode == "oracle":
        raise ValueError("analyze needs an observable estimator, not an oracle")
    notes: List[str] = []
    if isinstance(series, Prepared):
        prep = series
    else:
        prep = Prepared(series)
    tie_note = core.check_ties(prep.x)
    if tie_note:
        notes.append(tie_note)
    check_block_length(b, prep.n)

    vr = _variance(prep, b)
    t_hat = prep.t_hat(b, variant.scheme_mode, variant.pseudo_kind, variant.cdf_mode == "leave_block_out")
    if not t_hat > 0:
        raise DegenerateSeriesError("all pseudo-observations are zero; the extremal index is undefined")
    raw = 1.0 / t_hat
    sliding = variant.scheme_mode == "sliding"
    sigma2 = vr.sigma2_sl if sliding else vr.sigma2_dj
    tau2 = vr.tau2_sl if sliding else vr.tau2_dj
    if sigma2 < 0:
        notes.append("estimated sliding-blocks variance is negative; floored at 0")
    bc = bias_corrected(raw, max(sigma2, 0.0), vr.k)
    point = clamp_unit(bc if bias_correct else raw)
    ci = confidence_interval(point, max(tau2, 0.0), vr.k, level, clip=True)
    return Analysis(point, bc, raw, vr.sigma2_dj, vr.sigma2_sl, tau2, ci, vr.k, b, prep.n, variant, bias_correct, notes)
