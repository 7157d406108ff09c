"""Pseudo maximum-likelihood estimators of the extremal index.

``B`` estimators average ``Z = b(1 - F(M))``, ``N`` estimators
average ``Y = -b log F(M)``; both invert the mean of the pseudo-observations,
the maximum-likelihood estimate for an exponential sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from eix.core import BlockScheme, as_series, pseudo_sample

_SCHEME_TAGS = {"disjoint": "dj", "sliding": "sl"}
_CDF_TAGS = {"full": "", "leave_block_out": "lbo", "oracle": "oracle"}


class DegenerateSeriesError(ValueError):
    """All pseudo-observations vanish, e.g. for a constant series."""


@dataclass(frozen=True)
class EstimatorVariant:
    """Which estimator to compute: pseudo-observation kind, block layout, cdf.

    >>> EstimatorVariant.parse("N-dj-lbo")
    EstimatorVariant(kind='N', scheme_mode='disjoint', cdf_mode='leave_block_out')
    """

    kind: Literal["B", "N"] = "B"
    scheme_mode: Literal["disjoint", "sliding"] = "sliding"
    cdf_mode: Literal["full", "leave_block_out", "oracle"] = "full"

    def __post_init__(self):
        if self.kind not in ("B", "N"):
            raise ValueError(f"estimator kind must be 'B' or 'N', got {self.kind!r}")
        if self.scheme_mode not in _SCHEME_TAGS:
            raise ValueError(f"unknown scheme mode {self.scheme_mode!r}")
        if self.cdf_mode not in _CDF_TAGS:
            raise ValueError(f"unknown cdf mode {self.cdf_mode!r}")

    @property
    def pseudo_kind(self) -> str:
        return "Z" if self.kind == "B" else "Y"

    @property
    def label(self) -> str:
        parts = [self.kind, _SCHEME_TAGS[self.scheme_mode], _CDF_TAGS[self.cdf_mode]]
        return "-".join(p for p in parts if p)

    @classmethod
    def parse(cls, label: str) -> "EstimatorVariant":
        """Inverse of :attr:`label`, e.g. ``"B-sl"`` or ``"N-dj-lbo"``."""
        parts = label.strip().split("-")
        if len(parts) not in (2, 3):
            raise ValueError(f"cannot parse estimator label {label!r}")
        schemes = {v: k for k, v in _SCHEME_TAGS.items()}
        cdfs = {v: k for k, v in _CDF_TAGS.items() if v}
        try:
            scheme = schemes[parts[1]]
            cdf = cdfs[parts[2]] if len(parts) == 3 else "full"
        except KeyError:
            raise ValueError(f"cannot parse estimator label {label!r}") from None
        return cls(parts[0], scheme, cdf)


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate for one series, block length and variant.

    ``theta_raw`` is the unconstrained estimate ``1 / t_hat``; ``theta`` is it
    clipped to (0, 1]. ``k = floor(n / b)`` is the effective number of blocks
    for both layouts.
    """

    theta_raw: float
    theta: float
    t_hat: float
    k: int
    b: int
    n: int
    variant: EstimatorVariant


def check_block_length(b: int, n: int) -> None:
    if not (2 <= b <= n // 2):
        raise ValueError(f"block length must satisfy 2 <= b <= n/2 = {n // 2}, got {b}")


def _report(t_hat: float, b: int, n: int, variant: EstimatorVariant) -> EstimateReport:
    if not t_hat > 0:
        raise DegenerateSeriesError(
            "all pseudo-observations are zero (constant series?); the extremal index is undefined"
        )
    raw = 1.0 / t_hat
    return EstimateReport(raw, min(raw, 1.0), t_hat, n // b, b, n, variant)


def estimate(
    series,
    b: int,
    variant: EstimatorVariant = EstimatorVariant(),
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> EstimateReport:
    """Estimate the extremal index of ``series`` with block length ``b``.

    ``cdf`` is only used with ``variant.cdf_mode == "oracle"``.

    Raises
    ------
    DegenerateSeriesError
        If the mean pseudo-observation is zero.
    ValueError
        If ``b`` is outside ``[2, n/2]``.
    """
    x = as_series(series, min_length=2)
    check_block_length(b, x.size)
    scheme = BlockScheme(b, variant.scheme_mode, x.size)
    ps = pseudo_sample(x, scheme, variant.pseudo_kind, variant.cdf_mode, cdf)
    return _report(ps.mean(), b, x.size, variant)


def oracle_estimate(uniforms, b: int, kind: str = "B", scheme_mode: str = "disjoint") -> EstimateReport:
    """Estimate from probability-transformed values ``U_s = F(X_s)`` with the true cdf.

    Only meaningful in simulations where ``F`` is known.
    """
    u = as_series(uniforms, min_length=2)
    if not np.all((u > 0) & (u < 1)):
        raise ValueError("oracle inputs must lie in the open interval (0, 1)")
    variant = EstimatorVariant(kind, scheme_mode, "oracle")
    return estimate(u, b, variant, cdf=lambda m: m)
