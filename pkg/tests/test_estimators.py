import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eix import DegenerateSeriesError, EstimatorVariant, estimate, oracle_estimate
from eix.inference import variance_estimate
from eix.models import ARMAX, simulate


def test_hand_examples():
    x = [1, 2, 3, 4]
    b = estimate(x, 2, EstimatorVariant("B", "disjoint"))
    assert (b.theta_raw, b.theta) == (2.0, 1.0)
    nn = estimate(x, 2, EstimatorVariant("N", "disjoint"))
    assert nn.theta_raw == pytest.approx(1 / math.log(2), abs=1e-12)
    assert nn.theta == 1.0


@pytest.mark.parametrize("label", ["B-sl", "B-dj", "N-sl", "N-dj-lbo", "B-sl-lbo", "B-dj-oracle"])
def test_label_round_trip(label):
    assert EstimatorVariant.parse(label).label == label


@pytest.mark.parametrize("label", ["B", "X-dj", "B-zz", "B-dj-foo", "B-dj-lbo-x"])
def test_label_rejects(label):
    with pytest.raises(ValueError):
        EstimatorVariant.parse(label)


def test_block_length_bounds():
    with pytest.raises(ValueError):
        estimate(np.arange(10.0), 6)
    with pytest.raises(ValueError):
        estimate(np.arange(10.0), 1)


def test_constant_series_is_degenerate():
    with pytest.raises(DegenerateSeriesError):
        estimate(np.ones(50), 5)


def test_oracle_examples():
    r = oracle_estimate([0.5, 0.25, 0.75, 1 - 1e-9], 2)
    assert r.theta_raw == pytest.approx(2.0, rel=1e-8)
    for b in (2, 4, 5):
        assert oracle_estimate(np.full(20, 0.5), b).theta_raw == pytest.approx(1 / (b / 2), rel=1e-12)
    with pytest.raises(ValueError):
        oracle_estimate([0.5, 1.0, 0.2, 0.3], 2)


def test_n_never_exceeds_b(rng):
    for _ in range(1000):
        n = int(rng.integers(8, 300))
        x = rng.standard_normal(n) if rng.random() < 0.5 else rng.pareto(1.5, n)
        b = int(rng.integers(2, n // 2 + 1))
        for mode in ("disjoint", "sliding"):
            tb = estimate(x, b, EstimatorVariant("B", mode)).theta_raw
            tn = estimate(x, b, EstimatorVariant("N", mode)).theta_raw
            assert tn <= tb


def test_leave_block_out_scaling(rng):
    for n, b in [(1024, 16), (3000, 50), (8192, 128)]:
        x = rng.standard_normal(n)
        full = estimate(x, b, EstimatorVariant("B", "disjoint")).theta_raw
        lbo = estimate(x, b, EstimatorVariant("B", "disjoint", "leave_block_out")).theta_raw
        assert lbo == pytest.approx((1 - 1 / (n // b)) * full, rel=1e-12, abs=0)


def test_leave_block_out_scaling_with_remainder(rng):
    # with a remainder the factor is 1 - b/n rather than 1 - 1/k
    n, b = 1000, 30
    x = rng.standard_normal(n)
    full = estimate(x, b, EstimatorVariant("B", "disjoint")).theta_raw
    lbo = estimate(x, b, EstimatorVariant("B", "disjoint", "leave_block_out")).theta_raw
    assert lbo == pytest.approx((1 - b / n) * full, rel=1e-12, abs=0)


@given(
    arrays(np.int64, st.integers(8, 200), elements=st.integers(-30_000, 30_000), unique=True).map(lambda a: a / 1000.0),
    st.integers(2, 30),
    st.sampled_from(["B-dj", "B-sl", "N-dj", "N-sl", "N-dj-lbo", "N-sl-lbo", "B-dj-lbo"]),
)
def test_monotone_invariance(x, b, label):
    b = min(b, x.size // 2)
    v = EstimatorVariant.parse(label)
    g = np.arctan(x) * 7 - 2
    assume(np.unique(g).size == x.size)
    a = estimate(x, b, v).theta_raw
    c = estimate(g, b, v).theta_raw
    assert a == c


def test_iid_sliding_close_to_one():
    x = simulate(ARMAX(0.0), 8192, seed=99)
    r = estimate(x, 64, EstimatorVariant("B", "sliding"))
    vr = variance_estimate(x, 64)
    se = math.sqrt(max(vr.tau2_sl, vr.tau2_dj) / r.k)
    assert abs(r.theta_raw - 1.0) < 3 * se


def test_b_n_closeness_shrinks_with_block_length():
    n, reps = 2**15, 40
    gaps = {b: [] for b in (16, 64, 256)}
    for r in range(reps):
        x = simulate(ARMAX(0.5), n, seed=1000 + r)
        for b in gaps:
            tb = estimate(x, b, EstimatorVariant("B", "disjoint")).theta_raw
            tn = estimate(x, b, EstimatorVariant("N", "disjoint")).theta_raw
            gaps[b].append(math.sqrt(n // b) * abs(tb - tn))
    m = [np.mean(gaps[b]) for b in (16, 64, 256)]
    assert m[0] > m[1] > m[2]
