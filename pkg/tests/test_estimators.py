import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from identlab._random import substream
from identlab.errors import DegenerateSample, InsufficientData
from identlab.estimators import (
    RHO_MAX, changepoint_pvalues, changepoint_scan, residual_sum_squares, rho_hat_from_stats,
    rho_hat_invariant, rho_mle_known_mu, rho_mle_replicated, scan_statistic, var_components_m2,
)
from identlab.gaussian_core import EquicorrSpec
from identlab.models import BinarySpec, TwoLevelSpec, sample_binary, sample_m1, sample_m2


def scan_oracle(x):
    """Loop over every split; plain Python arithmetic."""
    n = len(x)
    phat = sum(x) / n
    best, where = 0.0, 0
    for t in range(1, n):
        var = phat * (1 - phat) * (1 / t + 1 / (n - t))
        if var <= 0:
            continue
        z = abs(sum(x[:t]) / t - sum(x[t:]) / (n - t)) / math.sqrt(var)
        if z > best + 1e-12:
            best, where = z, t
    return best, where


def test_rho_mle_hand_value():
    # xbar = 2, lambda1 = 3 * 4 = 12, lambda2 = 2 / 2 = 1, rho = 11 / 14
    est = rho_mle_known_mu([1.0, 2.0, 3.0], 0.0)
    assert est.rho_hat == pytest.approx(11 / 14, rel=1e-14)
    assert est.lambda1_hat == 12.0 and est.lambda2_hat == 1.0


def test_rho_mle_clipping_and_errors():
    assert rho_mle_known_mu([-1.0, 1.0], 0.0).rho_hat == 0.0
    assert rho_mle_known_mu([2.0, 2.0], 0.0).rho_hat == RHO_MAX
    with pytest.raises(DegenerateSample):
        rho_mle_known_mu([0.0, 0.0], 0.0)
    with pytest.raises(InsufficientData):
        rho_mle_known_mu([1.0], 0.0)


@settings(max_examples=50, deadline=None)
@given(x=st.lists(st.floats(-100, 100), min_size=2, max_size=30), mu=st.floats(-5, 5))
def test_rho_hat_vectorised_agrees(x, mu):
    x = np.array(x)
    try:
        single = rho_mle_known_mu(x, mu).rho_hat
    except DegenerateSample:
        return
    vec = rho_hat_from_stats(x.size, x.mean(), residual_sum_squares(x), mu)
    assert 0.0 <= single <= RHO_MAX
    assert float(vec) == pytest.approx(single, abs=1e-9)


def test_rho_replicated_consistent():
    spec = EquicorrSpec(10, 0.0, 1.0, 0.5)
    est = rho_mle_replicated(sample_m1(spec, substream(1), size=20_000), 0.0)
    assert est.rho_hat == pytest.approx(0.5, abs=0.02)


def test_rho_single_sequence_does_not_concentrate():
    spec_small, spec_big = EquicorrSpec(100, 0, 1, 0.5), EquicorrSpec(5000, 0, 1, 0.5)
    iqr = []
    for i, spec in enumerate((spec_small, spec_big)):
        x = sample_m1(spec, substream(2, i), size=2000)
        r = rho_hat_from_stats(spec.n, x.mean(1), residual_sum_squares(x), 0.0)
        q1, q3 = np.percentile(r, [25, 75])
        iqr.append(q3 - q1)
    assert 0.7 < iqr[0] / iqr[1] < 1.4


def test_rho_hat_invariant_ignores_location():
    x = sample_m1(EquicorrSpec(50, 0.0, 1.0, 0.3), substream(3))
    assert rho_hat_invariant(x) == pytest.approx(rho_hat_invariant(x + 17.0), abs=1e-12)


def test_var_components_hand_value():
    est = var_components_m2([[1.0, 2.0, 3.0], [4.0, 6.0]])
    # within SS = 2 + 2, n - m = 3
    assert est.tau2_2_hat == pytest.approx(4 / 3)
    assert est.grand_mean == pytest.approx(16 / 5)
    assert est.group_means.tolist() == [2.0, 5.0]
    with pytest.raises(InsufficientData):
        var_components_m2([[1.0], [2.0]])


def test_var_components_recovers_tau2():
    spec = TwoLevelSpec(0.0, 1.0, 2.0, (5000, 5000))
    est = var_components_m2(sample_m2(spec, substream(4)))
    assert abs(est.tau2_2_hat - 2.0) <= 4 * 2.0 * math.sqrt(2 / 9998)


def test_scan_hand_value():
    stat, split = scan_statistic([0, 0, 0, 0, 1, 1, 1, 1])
    # t = 4: |0 - 1| / sqrt(0.25 * (1/4 + 1/4))
    assert stat[0] == pytest.approx(2 * math.sqrt(2))
    assert split[0] == 4


@settings(max_examples=80, deadline=None)
@given(x=st.lists(st.integers(0, 1), min_size=2, max_size=40))
def test_scan_matches_loop_oracle(x):
    stat, split = scan_statistic(x)
    best, where = scan_oracle(x)
    assert stat[0] == pytest.approx(best, rel=1e-12, abs=1e-12)
    if best > 0:
        assert scan_oracle(x[:])[0] == pytest.approx(stat[0])
        assert 1 <= split[0] <= len(x) - 1
    else:
        assert split[0] == 0


@settings(max_examples=30, deadline=None)
@given(x=st.lists(st.integers(0, 1), min_size=4, max_size=30))
def test_scan_symmetries(x):
    x = np.array(x)
    s = scan_statistic(x)[0][0]
    assert scan_statistic(1 - x)[0][0] == pytest.approx(s)
    assert scan_statistic(x[::-1])[0][0] == pytest.approx(s)


def test_changepoint_scan_edge_cases():
    assert changepoint_scan(np.zeros(20)).p_value == 1.0
    assert changepoint_scan(np.ones(20)).p_value == 1.0
    with pytest.raises(InsufficientData):
        changepoint_scan([0, 1, 0])
    res = changepoint_scan(np.r_[np.zeros(50), np.ones(50)], 500, substream(5))
    assert res.p_value == 0.0 and res.split_index == 50


def test_changepoint_pvalues_match_single_scan_law():
    x = sample_binary(BinarySpec("M3", 0.5), 200, substream(6), size=1000)
    pv = changepoint_pvalues(x, 1000, seed=3)
    assert pv.shape == (1000,)
    assert np.all((pv >= 0) & (pv <= 1))
    assert 0.02 <= np.mean(pv <= 0.05) <= 0.08
    assert np.array_equal(pv, changepoint_pvalues(x, 1000, seed=3))


def test_changepoint_power_on_clear_change():
    spec = BinarySpec("ChangePoint", 0.2, m_cp=101, q_fixed=0.7)
    x = sample_binary(spec, 200, substream(7), size=300)
    assert np.mean(changepoint_pvalues(x, 1000, seed=4) <= 0.05) >= 0.9
