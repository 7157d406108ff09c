"""Block decomposition, empirical-cdf transforms and pseudo-observations.

Every estimator in the package works on the same ingredients: block maxima
of a series (disjoint or sliding), the empirical cdf evaluated at those
maxima, and the rescaled pseudo-observations

    Z = b * (1 - F(M))        Y = -b * log F(M)

which are approximately Exponential(theta) for large ``b``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from eix import _kernels

Mode = Literal["disjoint", "sliding"]
Kind = Literal["Z", "Y"]
CdfMode = Literal["full", "leave_block_out", "oracle"]

#: fraction of tied sample values above which a :class:`TieWarning` is emitted
TIE_WARN_FRACTION = 0.01


class TieWarning(UserWarning):
    """The series contains a noticeable share of tied values."""


def as_series(values, min_length: int = 1) -> np.ndarray:
    """Validate ``values`` as a series and return it as a float64 array."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {x.shape}")
    if x.size < min_length:
        raise ValueError(f"series needs at least {min_length} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains NaN or infinite values")
    return x


def _tied(x: np.ndarray) -> int:
    return int(x.size - np.unique(x).size)


def tie_fraction(x: np.ndarray) -> float:
    """Share of observations that duplicate another observation's value."""
    if x.size == 0:
        return 0.0
    return _tied(x) / x.size


def check_ties(x: np.ndarray) -> Optional[str]:
    """Warn (and return the message) if more than 1% of values are tied."""
    frac = tie_fraction(x)
    # compared on counts: exactly 1% must not warn through rounding
    if _tied(x) > TIE_WARN_FRACTION * x.size:
        msg = (
            f"{100 * frac:.1f}% of the observations are tied; rank-based "
            "estimates assume a continuous marginal distribution"
        )
        warnings.warn(msg, TieWarning, stacklevel=3)
        return msg
    return None


@dataclass(frozen=True)
class BlockScheme:
    """Block length ``b`` and layout (disjoint or sliding) for a series of length ``n``."""

    b: int
    mode: Mode
    n: int

    def __post_init__(self):
        if self.mode not in ("disjoint", "sliding"):
            raise ValueError(f"unknown block mode {self.mode!r}")
        if self.b < 1:
            raise ValueError(f"block length must be positive, got {self.b}")
        if self.b > self.n:
            raise ValueError(f"block length {self.b} exceeds series length {self.n}")

    @property
    def k(self) -> int:
        """Number of disjoint blocks, ``floor(n / b)``."""
        return self.n // self.b

    @property
    def n_blocks(self) -> int:
        """Number of maxima the scheme produces."""
        return self.k if self.mode == "disjoint" else self.n - self.b + 1


def ranks(series) -> np.ndarray:
    """Empirical cdf at each observation, ``#{t : X_t <= X_s} / n``.

    Tied values all receive the largest rank of their group.

    >>> ranks([3.0, 1.0, 2.0]).tolist() == [1.0, 1/3, 2/3]
    True
    """
    x = as_series(series)
    return ecdf_counts(np.sort(x), x) / x.size


def ecdf_counts(sorted_x: np.ndarray, points) -> np.ndarray:
    """Integer counts ``#{s : X_s <= p}`` for each ``p`` given the sorted sample."""
    return np.searchsorted(sorted_x, points, side="right")


def block_maxima(series, scheme: BlockScheme) -> np.ndarray:
    """Maxima over disjoint blocks or sliding windows of length ``scheme.b``.

    A trailing incomplete disjoint block is dropped. Sliding maxima use a
    monotone queue, so the cost is O(n) whatever the block length.
    """
    x = as_series(series)
    if x.size != scheme.n:
        raise ValueError(f"scheme is for n={scheme.n}, series has length {x.size}")
    return _maxima(x, scheme.b, scheme.mode)


def _maxima(x: np.ndarray, b: int, mode: str) -> np.ndarray:
    if mode == "disjoint":
        k = x.size // b
        return x[: k * b].reshape(k, b).max(axis=1)
    return _kernels.sliding_max(x, b)


@dataclass(frozen=True)
class PseudoSample:
    """Pseudo-observations built from block maxima."""

    kind: Kind
    scheme: BlockScheme
    values: np.ndarray
    maxima: np.ndarray
    cdf_mode: CdfMode

    def mean(self) -> float:
        return float(np.mean(self.values))


def pseudo_sample(
    series,
    scheme: BlockScheme,
    kind: Kind = "Z",
    cdf_mode: CdfMode = "full",
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> PseudoSample:
    """Transform block maxima into ``Z`` or ``Y`` pseudo-observations.

    Parameters
    ----------
    series : array_like
        The observations.
    scheme : BlockScheme
        Block length and layout.
    kind : {"Z", "Y"}
        ``Z = b(1 - F(M))`` or ``Y = -b log F(M)``.
    cdf_mode : {"full", "leave_block_out", "oracle"}
        Which cdf ``F`` is applied to the maxima: the empirical cdf of the
        whole sample, the empirical cdf of the ``n - b`` observations outside
        the block (or window), or the user supplied ``cdf``. With
        ``leave_block_out`` a zero cdf value is raised to ``1/(2(n-b))``
        before taking the logarithm of ``Y``.
    cdf : callable, optional
        Required for ``cdf_mode="oracle"``; must map into (0, 1].
    """
    x = as_series(series)
    if kind not in ("Z", "Y"):
        raise ValueError(f"unknown pseudo-observation kind {kind!r}")
    if x.size != scheme.n:
        raise ValueError(f"scheme is for n={scheme.n}, series has length {x.size}")
    maxima = _maxima(x, scheme.b, scheme.mode)
    if maxima.size == 0:
        raise ValueError("empty pseudo sample")
    n, b = x.size, scheme.b

    if cdf_mode == "full":
        f = ecdf_counts(np.sort(x), maxima) / n
    elif cdf_mode == "leave_block_out":
        if n == b:
            raise ValueError("leave_block_out needs observations outside the block")
        # all b observations of the block are <= its maximum
        f = (ecdf_counts(np.sort(x), maxima) - b) / (n - b)
    elif cdf_mode == "oracle":
        if cdf is None:
            raise ValueError("oracle cdf_mode requires a cdf")
        f = np.asarray(cdf(maxima), dtype=np.float64)
        if f.shape != maxima.shape or not np.all((f > 0) & (f <= 1)):
            raise ValueError("oracle cdf must return values in (0, 1]")
    else:
        raise ValueError(f"unknown cdf_mode {cdf_mode!r}")

    return PseudoSample(kind, scheme, _transform(f, b, kind, n, cdf_mode), maxima, cdf_mode)


def _transform(f: np.ndarray, b: int, kind: str, n: int, cdf_mode: str) -> np.ndarray:
    if kind == "Z":
        return b * (1.0 - f)
    if cdf_mode == "leave_block_out":
        f = np.maximum(f, 1.0 / (2.0 * (n - b)))
    return -b * np.log(f)
