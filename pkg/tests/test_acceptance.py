"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line (also printed at the end of the
pytest run) and then asserts on the same condition, so tolerances live in
exactly one place. Run standalone with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))
from tests_acceptance_log import LINES  # noqa: E402

from eix import EstimatorVariant, estimate, pseudo_sample, variance_estimate  # noqa: E402
from eix.core import BlockScheme  # noqa: E402
from eix.mc import SweepConfig, run_coverage, run_sweep, run_variance_ratio  # noqa: E402
from eix.models import (  # noqa: E402
    ARMAX,
    MarkovClayton,
    armax_moment_functions,
    armax_moments,
    armax_variance_closed,
    asymptotic_variance,
    clayton_theta,
    iid_moment_functions,
    simulate,
)


def verdict(number, title, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
    LINES.append(line)
    print(line, flush=True)
    assert ok, line


def rel_within(value, target, tol):
    return abs(value / target - 1.0) <= tol


def test_criterion_01_hand_oracles():
    start = time.perf_counter()
    x = [1.0, 2.0, 3.0, 4.0]
    s = BlockScheme(2, "disjoint", 4)
    checks = {
        "Z": (pseudo_sample(x, s, "Z").values, [1.0, 0.0]),
        "Y": (pseudo_sample(x, s, "Y").values, [2 * math.log(2), 0.0]),
        "Z_lbo": (pseudo_sample(x, s, "Z", "leave_block_out").values, [2.0, 0.0]),
        "theta_B": ([estimate(x, 2, EstimatorVariant("B", "disjoint")).theta_raw], [2.0]),
        "theta_N": ([estimate(x, 2, EstimatorVariant("N", "disjoint")).theta_raw], [1 / math.log(2)]),
        "B_hat": (variance_estimate(x, 2).b_hat, [0.0, 0.0]),
        "sigma2_dj": ([variance_estimate(x, 2).sigma2_dj], [0.0]),
    }
    elapsed = time.perf_counter() - start
    err = max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in checks.values())
    verdict(1, "hand oracles on ([1,2,3,4], b=2)", err <= 1e-12 and elapsed < 1.0, f"max error {err:.1e}, {elapsed:.3f}s")


def test_criterion_02_identities():
    rng = np.random.default_rng(2024)
    n_le_b = True
    for _ in range(1000):
        n = int(rng.integers(8, 400))
        x = rng.standard_normal(n)
        b = int(rng.integers(2, n // 2 + 1))
        for mode in ("disjoint", "sliding"):
            n_le_b &= estimate(x, b, EstimatorVariant("N", mode)).theta_raw <= estimate(x, b, EstimatorVariant("B", mode)).theta_raw

    lbo_err = 0.0
    for n, b in [(1024, 8), (4096, 64), (8192, 128), (3000, 60)]:
        x = rng.standard_normal(n)
        full = estimate(x, b, EstimatorVariant("B", "disjoint")).theta_raw
        lbo = estimate(x, b, EstimatorVariant("B", "disjoint", "leave_block_out")).theta_raw
        lbo_err = max(lbo_err, abs(lbo / ((1 - 1 / (n // b)) * full) - 1))

    invariant = True
    labels = ["B-dj", "B-sl", "N-dj", "N-sl", "B-dj-lbo", "N-dj-lbo", "B-sl-lbo", "N-sl-lbo"]
    for _ in range(50):
        x = rng.standard_normal(600)
        g = np.exp(2 * x) + 5
        for label in labels:
            v = EstimatorVariant.parse(label)
            invariant &= estimate(x, 20, v).theta_raw == estimate(g, 20, v).theta_raw
        invariant &= variance_estimate(x, 20).sigma2_dj == variance_estimate(g, 20).sigma2_dj

    rep = run_sweep(SweepConfig(ARMAX(0.5), n=2048, blocks=(4, 16, 64, 256), reps=100, estimators=("B-sl-bc", "N-sl-lbo", "B-dj")))
    mse_err = max(abs(r.mse - (r.bias2 + r.variance)) / r.mse for r in rep.rows)

    ok = n_le_b and lbo_err <= 1e-12 and invariant and mse_err <= 1e-12
    verdict(2, "algebraic identities", ok,
            f"N<=B on 1000 series: {n_le_b}; lbo rel err {lbo_err:.1e}; monotone invariance: {invariant}; mse identity rel err {mse_err:.1e}")


def test_criterion_03_theory_crosscheck():
    start = time.perf_counter()
    quad_err = 0.0
    for alpha in (0.0, 0.25, 0.5, 0.75):
        q = asymptotic_variance(armax_moment_functions(alpha))
        c = armax_variance_closed(alpha)
        quad_err = max(quad_err, abs(q.sigma2_dj - c.sigma2_dj), abs(q.sigma2_sl - c.sigma2_sl))
    ident_err = 0.0
    for alpha in np.arange(1, 10) / 10:
        for sigma in np.arange(1, 100) / 100:
            m12, m10 = armax_moments(alpha, sigma)
            ident_err = max(ident_err, abs(m12 + m10 / (1 - alpha) - (1 + alpha * sigma) / (1 - alpha) ** 2))
    iid = asymptotic_variance(iid_moment_functions())
    elapsed = time.perf_counter() - start
    iid_ok = abs(iid.sigma2_dj - 0.5) < 1e-8 and round(iid.sigma2_sl, 5) == 0.27259 and round(iid.sigma2_sl, 4) == 0.2726
    ok = quad_err < 1e-8 and ident_err <= 1e-12 and iid_ok and elapsed < 5
    verdict(3, "quadrature vs closed form, moment identity, iid values", ok,
            f"quad err {quad_err:.1e}; identity err {ident_err:.1e}; iid ({iid.sigma2_dj:.10f}, {iid.sigma2_sl:.10f}); {elapsed:.2f}s")


def test_criterion_04_clt_variance():
    alpha, n, b = 0.5, 2**15, 2**7
    theta = 1 - alpha
    rep = run_sweep(SweepConfig(ARMAX(alpha), n=n, blocks=(b,), reps=5000, estimators=("B-dj", "B-sl"), master_seed=4))
    k = n // b
    v_dj = k * rep.row("B-dj", b).variance_raw / theta**2
    v_sl = k * rep.row("B-sl", b).variance_raw / theta**2
    t_dj, t_sl = (1 + alpha) / 2, (8 * math.log(2) - 5 + alpha) / 2
    ok = rel_within(v_dj, t_dj, 0.15) and rel_within(v_sl, t_sl, 0.15)
    verdict(4, "CLT variance of sqrt(k)(theta_hat/theta - 1), ARMAX 0.5", ok,
            f"dj {v_dj:.4f} vs {t_dj:.4f} ({100 * (v_dj / t_dj - 1):+.1f}%); sl {v_sl:.4f} vs {t_sl:.5f} ({100 * (v_sl / t_sl - 1):+.1f}%)")


MSE_TARGETS = {0.5: {"B-sl-bc": 1.58, "N-sl-lbo": 0.78}, 0.25: {"B-sl-bc": 2.03, "N-sl-lbo": 0.67}}


def test_criterion_05_min_mse():
    ok, parts = True, []
    for alpha, targets in MSE_TARGETS.items():
        rep = run_sweep(SweepConfig(ARMAX(alpha), n=8192, reps=2000, estimators=tuple(targets), master_seed=5))
        for est, target in targets.items():
            best = min((r for r in rep.rows if r.estimator == est), key=lambda r: r.mse)
            value = 1e3 * best.mse
            good = rel_within(value, target, 0.20)
            ok &= good
            parts.append(f"theta={1 - alpha} {est}: {value:.3f} vs {target} at b={best.b}{'' if good else ' OUT'}")
    verdict(5, "min-over-b MSE x 1e3, sliding estimators", ok, "; ".join(parts))


COVERAGE = [(0.5, 64, 0.93, 0.02), (0.75, 128, 0.94, 0.02), (0.0, 16, None, None)]


def test_criterion_06_coverage():
    ok, parts = True, []
    for alpha, b, target, tol in COVERAGE:
        rep = run_coverage(SweepConfig(ARMAX(alpha), n=8192, blocks=(b,), reps=5000, estimators=("B-dj-bc",), master_seed=6))
        cov = rep.row("B-dj-bc", b).coverage
        good = cov >= 0.99 if target is None else abs(cov - target) <= tol
        ok &= good
        parts.append(f"theta={1 - alpha} b={b}: {cov:.4f} ({'>= 0.99' if target is None else f'{target} +/- {tol}'})")
    verdict(6, "95% interval coverage, disjoint B estimator", ok, "; ".join(parts))


@pytest.fixture(scope="module")
def iid_report():
    cfg = SweepConfig(ARMAX(0.0), n=2**15, blocks=(128,), reps=2000, estimators=("B-dj", "B-dj-oracle"), master_seed=7)
    return run_sweep(cfg)


def test_criterion_07_variance_estimator(iid_report):
    t = iid_report.row("B-dj", 128).mean_tau2
    verdict(7, "iid mean tau2_dj near 1/2", rel_within(t, 0.5, 0.15), f"mean tau2_dj {t:.4f} ({100 * (t / 0.5 - 1):+.1f}%)")


def test_criterion_08_oracle_twice_rank(iid_report):
    k = 2**15 // 128
    v_rank = k * iid_report.row("B-dj", 128).variance_raw
    v_oracle = k * iid_report.row("B-dj-oracle", 128).variance_raw
    ratio = v_oracle / v_rank
    verdict(8, "oracle / rank-based variance ratio", 1.6 <= ratio <= 2.4,
            f"oracle {v_oracle:.4f}, rank {v_rank:.4f}, ratio {ratio:.3f}")


CLAYTON = [0.23, 0.41, 0.68, 1.06, 1.90]


def test_criterion_09_simulators():
    x = simulate(ARMAX(0.0), 100_000, seed=9)
    ks_iid = stats.kstest(x, lambda v: np.exp(-1 / v)).pvalue
    y = simulate(ARMAX(0.5), 1_000_000, seed=9)[::100]
    ks_dep = stats.kstest(y, lambda v: np.exp(-1 / v)).pvalue
    tau_err = 0.0
    for vt in CLAYTON:
        u = simulate(MarkovClayton(vt), 100_000, seed=10)
        tau = stats.kendalltau(u[:-1], u[1:]).statistic
        tau_err = max(tau_err, abs(tau - vt / (vt + 2)))
    thetas = [clayton_theta(vt).theta for vt in CLAYTON]
    # theta decreases as the dependence parameter grows
    targets = [0.95, 0.8, 0.6, 0.4, 0.2]
    theta_err = max(abs(t - g) for t, g in zip(thetas, targets))
    ok = ks_iid > 0.01 and ks_dep > 0.01 and tau_err <= 0.01 and theta_err <= 0.01
    verdict(9, "simulators: Frechet marginal, Kendall tau, Clayton chain theta", ok,
            f"KS p {ks_iid:.3f} (alpha 0), {ks_dep:.3f} (alpha 0.5); tau err {tau_err:.4f}; "
            f"theta {dict(zip(CLAYTON, [round(t, 4) for t in thetas]))} err {theta_err:.4f}")


def test_criterion_10_determinism():
    cfg = SweepConfig(ARMAX(0.5), n=2048, blocks=(8, 32, 128), reps=120, estimators=("B-sl-bc", "N-sl-lbo", "B-dj-oracle"), master_seed=10)
    outputs = {}
    for threads in (1, 2, 4):
        outputs[threads] = tuple(
            (r.to_json(), r.to_csv())
            for r in (run_sweep(cfg, threads), run_coverage(cfg, threads), run_variance_ratio(cfg, threads))
        )
    ok = outputs[1] == outputs[2] == outputs[4]
    verdict(10, "bit-identical reports for 1, 2 and 4 workers", ok, "sweep, coverage and ratio runs compared")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
