"""Time-series models with known extremal index, and their asymptotic theory.

Four families are simulated:

* ``ARMAX(alpha)``: ``X_s = max(alpha X_{s-1}, (1 - alpha) Z_s)`` with standard
  Frechet innovations; stationary standard Frechet, ``theta = 1 - alpha``.
* ``SquaredARCH(lam)``: ``X_s = (2e-5 + lam X_{s-1}) Z_s**2``, Gaussian ``Z``.
* ``ARCH(lam)``: ``X_s = (2e-5 + lam X_{s-1}**2)**0.5 Z_s``.
* ``MarkovClayton(vartheta)``: a Markov chain of uniforms whose consecutive
  pairs follow the survival Clayton copula.

For the ARMAX model the moments of the two-level cluster size distribution
are available in closed form, which gives the asymptotic variances of the
disjoint and sliding estimators both by quadrature and explicitly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from eix import _kernels
from eix.inference import SLIDING_SHIFT
from eix.quadrature import piecewise_simpson
from eix.seeding import generator, mix64, open_uniform

ARCH_OMEGA = 2e-5
DEFAULT_BURN_IN = 1000

# extremal indices tabulated by de Haan, Resnick, Rootzen & de Vries (1989)
SQUARED_ARCH_THETA = {0.1: 0.997, 0.5: 0.727, 0.9: 0.460, 0.99: 0.422}
ARCH_THETA = {0.1: 0.999, 0.5: 0.835, 0.7: 0.721, 0.99: 0.571}


@dataclass(frozen=True)
class ARMAX:
    alpha: float

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"ARMAX alpha must be in [0, 1), got {self.alpha}")

    name = "armax"
    burn_in = 0

    def _simulate(self, rng, n, burn_in):
        frechet = 1.0 / rng.standard_exponential(n + 1)
        return _kernels.armax_path(frechet[0], frechet[1:], self.alpha)

    def theta_true(self) -> float:
        return 1.0 - self.alpha

    def cdf(self, x):
        """Stationary marginal cdf (standard Frechet)."""
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


@dataclass(frozen=True)
class SquaredARCH:
    lam: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError(f"squared ARCH lambda must be in (0, 1), got {self.lam}")

    name = "sq-arch"
    burn_in = DEFAULT_BURN_IN

    def _simulate(self, rng, n, burn_in):
        z = rng.standard_normal(burn_in + n)
        x0 = ARCH_OMEGA / (1.0 - self.lam)
        return _kernels.squared_arch_path(x0, z, self.lam, ARCH_OMEGA)[burn_in:]

    def theta_true(self) -> float:
        return _lookup(SQUARED_ARCH_THETA, self.lam, "squared ARCH")


@dataclass(frozen=True)
class ARCH:
    lam: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError(f"ARCH lambda must be in (0, 1), got {self.lam}")

    name = "arch"
    burn_in = DEFAULT_BURN_IN

    def _simulate(self, rng, n, burn_in):
        z = rng.standard_normal(burn_in + n)
        x0 = math.sqrt(ARCH_OMEGA / (1.0 - self.lam))
        return _kernels.arch_path(x0, z, self.lam, ARCH_OMEGA)[burn_in:]

    def theta_true(self) -> float:
        return _lookup(ARCH_THETA, self.lam, "ARCH")


@dataclass(frozen=True)
class MarkovClayton:
    vartheta: float

    def __post_init__(self):
        if not self.vartheta > 0:
            raise ValueError(f"Clayton parameter must be positive, got {self.vartheta}")

    name = "clayton"
    burn_in = 0

    def _simulate(self, rng, n, burn_in):
        u0 = open_uniform(rng, 1)[0]
        w = open_uniform(rng, n)
        return _kernels.clayton_chain(u0, w, self.vartheta)

    def theta_true(self) -> float:
        return clayton_theta(self.vartheta).theta

    def cdf(self, x):
        return np.asarray(x, dtype=np.float64)


ModelSpec = Union[ARMAX, SquaredARCH, ARCH, MarkovClayton]

_FAMILIES = {"armax": (ARMAX, "alpha"), "sq-arch": (SquaredARCH, "lam"), "arch": (ARCH, "lam"), "clayton": (MarkovClayton, "vartheta")}


def make_model(name: str, param: float) -> ModelSpec:
    """Build a model from its family name (``armax``, ``sq-arch``, ``arch``, ``clayton``, ``iid``)."""
    if name == "iid":
        return ARMAX(0.0)
    try:
        cls, _ = _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_FAMILIES) + ['iid']}") from None
    return cls(param)


def model_params(model: ModelSpec) -> dict:
    cls, attr = _FAMILIES[model.name]
    return {"model": model.name, attr: getattr(model, attr)}


def _lookup(table, lam, label):
    for key, value in table.items():
        if math.isclose(lam, key, abs_tol=1e-12):
            return value
    raise ValueError(f"no tabulated extremal index for the {label} model with lambda={lam}; known: {sorted(table)}")


def simulate(model: ModelSpec, n: int, seed: int, burn_in: Optional[int] = None) -> np.ndarray:
    """Simulate ``n`` observations; output is fully determined by ``seed``.

    ``burn_in`` defaults to the model's own (1000 for the ARCH families, 0 for
    ARMAX and the Clayton chain, which start from their stationary law).
    """
    if n < 1:
        raise ValueError(f"series length must be positive, got {n}")
    burn = model.burn_in if burn_in is None else int(burn_in)
    if burn < 0:
        raise ValueError("burn_in must be nonnegative")
    return model._simulate(generator(seed), int(n), burn)


def theta_true(model: ModelSpec) -> float:
    return model.theta_true()


# -- Markovian copula: theta by simulation -----------------------------------


class MCValue(NamedTuple):
    theta: float
    se: float
    reps: int
    truncated: int


CLAYTON_REPS = 1_000_000
CLAYTON_SEED = 20160512
_CHUNK = 100_000


@lru_cache(maxsize=None)
def clayton_theta(
    vartheta: float,
    reps: int = CLAYTON_REPS,
    seed: int = CLAYTON_SEED,
    floor: float = 1e-12,
    max_factors: int = 100_000,
    threads: int = 1,
) -> MCValue:
    """Extremal index of the survival-Clayton chain, ``P(max_t prod_{s<=t} A_s <= U)``.

    The ``A_s`` are iid with cdf ``1 - (1 + s**vartheta)**-(1 + 1/vartheta)``
    and drawn by inversion. Each replication contributes ``1 - min(1, max)``,
    the conditional probability given the products, which is unbiased and
    has lower variance than the raw indicator. A product is abandoned once it
    falls below ``floor`` or after ``max_factors`` factors.
    """
    if not vartheta > 0:
        raise ValueError("Clayton parameter must be positive")
    chunks = [(i, min(_CHUNK, reps - i * _CHUNK)) for i in range((reps + _CHUNK - 1) // _CHUNK)]

    def run(chunk):
        i, size = chunk
        # numba's legacy generator takes a 32-bit seed
        return _kernels.clayton_theta_terms(size, float(vartheta), floor, max_factors, mix64(seed, i) & 0xFFFFFFFF)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    terms = np.concatenate([p[0] for p in parts])
    truncated = sum(p[1] for p in parts)
    return MCValue(float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(terms.size)), terms.size, truncated)


# -- asymptotic variance theory ----------------------------------------------


@dataclass(frozen=True)
class MomentFunctions:
    """Moments of the two-level cluster size law as functions of the level ratio.

    ``m12(s) = E[zeta1 zeta2]`` and ``m10(s) = E[zeta1 1(zeta2 = 0)]`` for
    ``s`` in (0, 1). ``breakpoints`` lists points in [0, 1] where the
    functions may be non-smooth; quadrature splits there.
    """

    m12: Callable[[float], float]
    m10: Callable[[float], float]
    theta: float
    breakpoints: Sequence[float] = field(default=(0.0, 1.0))


def armax_z(alpha: float, sigma: float) -> int:
    """``floor(log sigma / log alpha)``; 0 in the ``alpha -> 0`` limit."""
    if alpha == 0:
        return 0
    return int(math.floor(math.log(sigma) / math.log(alpha)))


def armax_moments(alpha: float, sigma: float) -> Tuple[float, float]:
    """Closed-form ``(E[zeta1 zeta2], E[zeta1 1(zeta2 = 0)])`` for ARMAX(alpha)."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must be in (0, 1), got {sigma}")
    z = armax_z(alpha, sigma)
    az1 = alpha ** (z + 1)
    m12 = (az1 + sigma * (1.0 + z * (1.0 - alpha))) / (1.0 - alpha) ** 2
    m10 = (1.0 - az1) / (1.0 - alpha) - sigma * (z + 1)
    return m12, m10


def armax_moment_functions(alpha: float, smallest: float = 1e-15) -> MomentFunctions:
    """Moment functions for ARMAX(alpha), with breakpoints at the powers of ``alpha``.

    Below ``smallest`` the pieces are lumped into one; the integrands are
    bounded there, so that piece contributes less than ``4 smallest / (1-alpha)**2``.
    """
    bps = [0.0, 1.0]
    if alpha > 0:
        j = 1
        while alpha**j > smallest:
            bps.append(alpha**j)
            j += 1
    return MomentFunctions(
        lambda s: armax_moments(alpha, s)[0],
        lambda s: armax_moments(alpha, s)[1],
        1.0 - alpha,
        tuple(sorted(bps)),
    )


def iid_moment_functions() -> MomentFunctions:
    """Serial independence: ``m12 = s``, ``m10 = 1 - s``, ``theta = 1``."""
    return MomentFunctions(lambda s: s, lambda s: 1.0 - s, 1.0)


class AsymptoticVariance(NamedTuple):
    sigma2_dj: float
    sigma2_sl: float

    @property
    def shift(self) -> float:
        """``sigma2_dj - sigma2_sl``; equals ``(3 - 4 log 2) / theta**2``."""
        return self.sigma2_dj - self.sigma2_sl


def asymptotic_variance(moments: MomentFunctions, tol: float = 1e-9) -> AsymptoticVariance:
    """Asymptotic variances of ``sqrt(k)(T_hat - 1/theta)`` for disjoint and sliding blocks.

        sigma2_dj = 4 I12 + 4 I10 / theta - 1 / theta**2
        sigma2_sl = 4 I12 + 4 I10 / theta - (4 - 4 log 2) / theta**2

    with ``I = int_0^1 m(s) / (1 + s)**3 ds``, each integral computed by
    piecewise adaptive Simpson to absolute tolerance ``tol``.
    """
    th = moments.theta
    i12 = piecewise_simpson(lambda s: moments.m12(s) / (1.0 + s) ** 3, moments.breakpoints, tol)
    i10 = piecewise_simpson(lambda s: moments.m10(s) / (1.0 + s) ** 3, moments.breakpoints, tol)
    core_part = 4.0 * i12 + 4.0 * i10 / th
    dj = core_part - 1.0 / th**2
    return AsymptoticVariance(dj, dj - SLIDING_SHIFT / th**2)


class ArmaxVariance(NamedTuple):
    sigma2_dj: float
    sigma2_sl: float
    normalized_dj: float
    normalized_sl: float


def armax_variance_closed(alpha: float) -> ArmaxVariance:
    """Explicit ARMAX variances; ``normalized_*`` refer to ``sqrt(k)(theta_hat/theta - 1)``."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    nd = (1.0 + alpha) / 2.0
    ns = (8.0 * math.log(2.0) - 5.0 + alpha) / 2.0
    d = (1.0 - alpha) ** 2
    return ArmaxVariance(nd / d, ns / d, nd, ns)
