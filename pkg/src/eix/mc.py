"""Monte Carlo experiments: MSE over block lengths, coverage, variance-estimator quality.

Replication ``r`` of bank ``j`` always simulates from the seed
``mix64(bank_seed(master_seed, j), r)``, one replication produces one
small array of per-(estimator, b) results, and aggregation runs over those
arrays in replication order. Reports are therefore identical for any number
of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from eix.core import _maxima
from eix.estimators import DegenerateSeriesError, EstimatorVariant
from eix.inference import Prepared, _variance, bias_corrected, clamp_unit, normal_quantile
from eix.models import ModelSpec, model_params, simulate, theta_true
from eix.seeding import mix64

logger = logging.getLogger(__name__)

DEFAULT_BLOCKS = tuple(2**j for j in range(2, 10))
#: largest tolerated share of failed replications per (estimator, b) cell
MAX_FAILURE_RATE = 0.001
_CHUNK = 25

# per-replication result fields
_RAW, _EST, _TAU2, _COVER = range(4)
_NFIELDS = 4


class MonteCarloError(RuntimeError):
    """Too many replications failed for the results to be trusted."""


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator variant, optionally followed by the bias reduction (label suffix ``-bc``)."""

    variant: EstimatorVariant
    bias_correct: bool = False

    @property
    def label(self) -> str:
        return self.variant.label + ("-bc" if self.bias_correct else "")

    @classmethod
    def parse(cls, label: str) -> "EstimatorSpec":
        label = label.strip()
        bc = label.endswith("-bc")
        if bc:
            label = label[: -len("-bc")]
        spec = cls(EstimatorVariant.parse(label), bc)
        if bc and spec.variant.cdf_mode == "oracle":
            raise ValueError("bias reduction is not defined for oracle estimators")
        return spec


@dataclass(frozen=True)
class SweepConfig:
    model: ModelSpec
    n: int = 8192
    blocks: Tuple[int, ...] = DEFAULT_BLOCKS
    reps: int = 2000
    master_seed: int = 0
    estimators: Tuple[str, ...] = ("B-sl-bc", "N-sl-lbo")
    #: apply the bias reduction to every non-oracle estimator
    bias_correct: bool = False
    level: float = 0.95
    burn_in: Optional[int] = None

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("need at least 2 replications")
        if not self.blocks:
            raise ValueError("no block lengths given")
        bad = [b for b in self.blocks if not 2 <= b <= self.n // 2]
        if bad:
            raise ValueError(f"block lengths {bad} violate 2 <= b <= n/2 = {self.n // 2}")
        if not 0 < self.level < 1:
            raise ValueError("level must be in (0, 1)")
        self.specs()

    def specs(self) -> List[EstimatorSpec]:
        out = []
        for label in self.estimators:
            s = EstimatorSpec.parse(label)
            if self.bias_correct and s.variant.cdf_mode != "oracle":
                s = EstimatorSpec(s.variant, True)
            out.append(s)
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = model_params(self.model)
        d["blocks"] = list(self.blocks)
        d["estimators"] = [s.label for s in self.specs()]
        return d


@dataclass
class SweepRow:
    estimator: str
    b: int
    k: int
    reps: int
    failed: int
    # constrained to [0, 1]
    mse: float
    bias2: float
    variance: float
    se_mse: float
    # unconstrained
    mse_raw: float
    bias2_raw: float
    variance_raw: float
    coverage: float
    mean_tau2: float
    var_ratio: float
    ratio_mse: float = math.nan
    ratio_bias: float = math.nan
    min_mse: bool = False


FIELDS = [f for f in SweepRow.__dataclass_fields__]


@dataclass
class SweepReport:
    kind: str
    config: dict
    theta: float
    rows: List[SweepRow] = field(default_factory=list)

    def row(self, estimator: str, b: int) -> SweepRow:
        for r in self.rows:
            if r.estimator == estimator and r.b == b:
                return r
        raise KeyError((estimator, b))

    def argmin(self) -> dict:
        """Block length of minimal (constrained) MSE per estimator."""
        return {r.estimator: r.b for r in self.rows if r.min_mse}

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "theta": self.theta,
            "argmin": self.argmin(),
            "rows": [_clean(asdict(r)) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, f)) for f in FIELDS])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# -- replication ---------------------------------------------------------------


def bank_seed(master_seed: int, bank: int) -> int:
    return master_seed if bank == 0 else mix64(master_seed, (1 << 64) - bank)


def replicate(config: SweepConfig, seed: int, theta: float) -> np.ndarray:
    """Results of every estimator at every block length for one simulated series.

    Shape ``(n_estimators, n_blocks, 4)`` holding the unconstrained plain
    estimate, the unconstrained reported estimate (bias-reduced if asked),
    ``tau2`` and the coverage indicator; NaN marks a failure.
    """
    specs = config.specs()
    out = np.full((len(specs), len(config.blocks), _NFIELDS), np.nan)
    x = simulate(config.model, config.n, seed, config.burn_in)
    prep = Prepared(x)
    oracle = None
    if any(s.variant.cdf_mode == "oracle" for s in specs):
        cdf = getattr(config.model, "cdf", None)
        if cdf is None:
            raise ValueError(f"model {config.model.name} has no known marginal cdf for oracle estimators")
        oracle = np.clip(cdf(x), 1e-300, 1.0)
    u = normal_quantile(0.5 + config.level / 2)
    for j, b in enumerate(config.blocks):
        try:
            vr = _variance(prep, b)
        except DegenerateSeriesError:
            continue
        k = vr.k
        for i, s in enumerate(specs):
            v = s.variant
            if v.cdf_mode == "oracle":
                m = _maxima(oracle, b, v.scheme_mode)
                t = float(np.mean(b * (1.0 - m) if v.kind == "B" else -b * np.log(m)))
                if t > 0:
                    out[i, j, _RAW] = out[i, j, _EST] = 1.0 / t
                continue
            t = prep.t_hat(b, v.scheme_mode, v.pseudo_kind, v.cdf_mode == "leave_block_out")
            if not t > 0:
                continue
            raw = 1.0 / t
            sliding = v.scheme_mode == "sliding"
            sigma2 = vr.sigma2_sl if sliding else vr.sigma2_dj
            tau2 = vr.tau2_sl if sliding else vr.tau2_dj
            est = bias_corrected(raw, max(sigma2, 0.0), k) if s.bias_correct else raw
            point = clamp_unit(est)
            half = u * math.sqrt(max(tau2, 0.0) / k)
            out[i, j] = (raw, est, tau2, float(point - half <= theta <= point + half))
    return out


def _run_chunk(args):
    config, seeds, theta = args
    return np.stack([replicate(config, s, theta) for s in seeds])


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get("EIX_THREADS", "1") or 1)
    return max(1, int(threads))


def simulate_bank(config: SweepConfig, bank: int = 0, threads: Optional[int] = None, reps: Optional[int] = None) -> np.ndarray:
    """Per-replication results, shape ``(reps, n_estimators, n_blocks, 4)``."""
    reps = config.reps if reps is None else reps
    theta = theta_true(config.model)
    base = bank_seed(config.master_seed, bank)
    seeds = [mix64(base, r) for r in range(reps)]
    jobs = [(config, seeds[i : i + _CHUNK], theta) for i in range(0, reps, _CHUNK)]
    workers = resolve_threads(threads)
    if workers == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    return np.concatenate(parts)


# -- aggregation ---------------------------------------------------------------


def _moments(values: np.ndarray, target: float):
    m = values.mean()
    bias2 = (m - target) ** 2
    var = np.mean((values - m) ** 2)
    err2 = (values - target) ** 2
    mse = err2.mean()
    se = err2.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else math.nan
    return float(mse), float(bias2), float(var), float(se)


def _aggregate(kind: str, config: SweepConfig, res: np.ndarray, theta: float, var_bank: Optional[np.ndarray] = None) -> SweepReport:
    report = SweepReport(kind, config.to_dict(), theta)
    specs = config.specs()
    total = res.shape[0]
    for i, s in enumerate(specs):
        rows = []
        for j, b in enumerate(config.blocks):
            cell = res[:, i, j, :]
            ok = ~np.isnan(cell[:, _EST])
            failed = int(total - ok.sum())
            if failed > MAX_FAILURE_RATE * total:
                raise MonteCarloError(f"{failed} of {total} replications failed for {s.label} at b={b}")
            if failed:
                logger.warning("%s b=%d: %d degenerate replications excluded", s.label, b, failed)
            cell = cell[ok]
            k = config.n // b
            est = cell[:, _EST]
            mse, bias2, var, se = _moments(np.clip(est, 0.0, 1.0), theta)
            mse_r, bias2_r, var_r, _ = _moments(est, theta)
            tau2 = cell[:, _TAU2]
            has_tau = s.variant.cdf_mode != "oracle"
            mean_tau2 = float(tau2.mean()) if has_tau else math.nan
            coverage = float(cell[:, _COVER].mean()) if has_tau else math.nan
            var_sqrtk = k * var_r
            row = SweepRow(
                s.label, b, k, int(ok.sum()), failed, mse, bias2, var, se, mse_r, bias2_r, var_r,
                coverage, mean_tau2, mean_tau2 / var_sqrtk - 1.0 if has_tau and var_sqrtk > 0 else math.nan,
            )
            if var_bank is not None and has_tau:
                other = var_bank[:, i, j, _EST]
                other = other[~np.isnan(other)]
                denom = k * float(np.var(other, ddof=1))
                ratio = tau2 / denom
                row.ratio_mse = float(np.mean((ratio - 1.0) ** 2))
                row.ratio_bias = float(np.mean(ratio) - 1.0)
            rows.append(row)
        best = min(range(len(rows)), key=lambda r: rows[r].mse)
        rows[best].min_mse = True
        report.rows.extend(rows)
    return report


def run_sweep(config: SweepConfig, threads: Optional[int] = None) -> SweepReport:
    """MSE, squared bias and variance of each estimator over the block lengths."""
    theta = theta_true(config.model)
    return _aggregate("sweep", config, simulate_bank(config, 0, threads), theta)


def run_coverage(config: SweepConfig, threads: Optional[int] = None) -> SweepReport:
    """Empirical coverage of the normal confidence intervals around each estimator."""
    if all(s.variant.cdf_mode == "oracle" for s in config.specs()):
        raise ValueError("coverage needs at least one observable estimator")
    theta = theta_true(config.model)
    return _aggregate("coverage", config, simulate_bank(config, 0, threads), theta)


def run_variance_ratio(config: SweepConfig, threads: Optional[int] = None, var_reps: Optional[int] = None) -> SweepReport:
    """Quality of ``tau2`` as an estimate of ``Var(sqrt(k) theta_hat)``.

    ``tau2`` comes from one bank of replications; the variance it is compared
    with is the empirical variance of the unconstrained estimator over a
    second, independent bank of ``var_reps`` replications (default ``reps``).
    """
    theta = theta_true(config.model)
    bank_a = simulate_bank(config, 0, threads)
    bank_b = simulate_bank(config, 1, threads, var_reps)
    return _aggregate("ratio", config, bank_a, theta, var_bank=bank_b)
