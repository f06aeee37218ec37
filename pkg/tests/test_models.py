from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import ks_2samp, norm

from identlab._random import substream
from identlab.errors import DegenerateBase, InvalidP, InvalidRho, NoValidR
from identlab.gaussian_core import EquicorrSpec, equicorr_mvn, mvn_sample
from identlab.models import (
    BinarySpec, FixedClassSpec, TwoLevelSpec, associated_mixture, atoms_sampler,
    gaussian_mixture_sampler, m5_branch_marginals, m5_marginals, matched_pair,
    sample_binary, sample_fixed_class, sample_m1, sample_m2, solve_m5_r,
)


def m5_weight_oracle(p):
    """Branch marginals are q/2 (i.i.d.) and 1/2 (alternating), so r = q / (1 - q)."""
    q = min(p, 1 - p)
    return q / (1 - q)


# equicorrelated model ---------------------------------------------------------

def test_sample_m1_shapes_and_determinism():
    spec = EquicorrSpec(7, 1.0, 2.0, 0.3)
    assert sample_m1(spec, substream(0)).shape == (7,)
    assert sample_m1(spec, substream(0), size=4).shape == (4, 7)
    assert np.array_equal(sample_m1(spec, substream(0), 4), sample_m1(spec, substream(0), 4))


def test_sample_m1_rho_zero_is_iid():
    x = sample_m1(EquicorrSpec(3, 0.0, 1.0, 0.0), substream(1), size=10_000)[:, 0]
    ref = substream(2).standard_normal(10_000)
    assert ks_2samp(x, ref).pvalue >= 0.001


def test_sample_m1_pair_correlation():
    x = sample_m1(EquicorrSpec(2, 0.0, 1.0, 0.5), substream(3), size=100_000)
    r = np.corrcoef(x.T)[0, 1]
    # SE of a sample correlation near 0.5 is (1 - rho^2) / sqrt(N)
    assert abs(r - 0.5) <= 3 * 0.75 / np.sqrt(100_000)


def test_sample_m1_matches_cholesky_sampler():
    spec = EquicorrSpec(5, 0.5, 1.5, 0.4)
    a = sample_m1(spec, substream(4), size=10_000)
    b = mvn_sample(equicorr_mvn(spec), 10_000, substream(5))
    for j in range(5):
        assert ks_2samp(a[:, j], b[:, j]).pvalue >= 0.001
    assert ks_2samp(a.mean(axis=1), b.mean(axis=1)).pvalue >= 0.001


def test_mean_variance_inflation():
    x = sample_m1(EquicorrSpec(10, 0.0, 1.0, 0.5), substream(6), size=100_000)
    v = x.mean(axis=1).var(ddof=1)
    assert abs(v - 0.55) <= 3 * 0.55 * np.sqrt(2 / (100_000 - 1))


@pytest.mark.parametrize("rho1,rho2,s1,expected", [(0.2, 0.6, 1.0, 2.0), (0.0, 0.5, 1.0, 2.0),
                                                    (0.3, 0.3, 4.2, 4.2)])
def test_matched_pair_values(rho1, rho2, s1, expected):
    assert matched_pair(rho1, rho2, s1) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=50)
@given(rho1=st.floats(0, 0.99), rho2=st.floats(0, 0.99), s1=st.floats(0.01, 100))
def test_matched_pair_equal_residual_variance(rho1, rho2, s1):
    s2 = matched_pair(rho1, rho2, s1)
    assert (1 - rho1) * s1 == pytest.approx((1 - rho2) * s2, rel=1e-12)


def test_matched_pair_errors():
    with pytest.raises(InvalidRho):
        matched_pair(1.0, 0.5, 1.0)
    with pytest.raises(InvalidRho):
        matched_pair(0.5, -0.1, 1.0)


def test_matched_residual_coordinates_share_law():
    s2 = matched_pair(0.2, 0.6, 1.0)
    a = sample_m1(EquicorrSpec(20, 0.0, 1.0, 0.2), substream(7), size=10_000)
    b = sample_m1(EquicorrSpec(20, 3.0, s2, 0.6), substream(8), size=10_000)
    ra = a - a.mean(axis=1, keepdims=True)
    rb = b - b.mean(axis=1, keepdims=True)
    assert ks_2samp(ra[:, 0], rb[:, 0]).pvalue >= 0.001
    assert ks_2samp((ra**2).sum(1), (rb**2).sum(1)).pvalue >= 0.001


# two-level model ---------------------------------------------------------------

def test_m2_structure_and_degenerate_tau1():
    spec = TwoLevelSpec(1.0, 0.0, 1.0, (3, 4))
    groups = sample_m2(spec, substream(9))
    assert [g.size for g in groups] == [3, 4]
    assert spec.m == 2 and spec.n == 7
    assert TwoLevelSpec.from_dict(spec.to_dict()) == spec
    x = np.concatenate([np.concatenate(sample_m2(spec, substream(10, i))) for i in range(3000)])
    assert ks_2samp(x, 1.0 + substream(11).standard_normal(x.size)).pvalue >= 0.001


def test_m2_rejects_bad_spec():
    with pytest.raises(ValueError):
        TwoLevelSpec(0, 1, 1, ())
    with pytest.raises(ValueError):
        TwoLevelSpec(0, 1, 0, (2,))


# binary models ---------------------------------------------------------------------

def test_binary_spec_validation():
    with pytest.raises(InvalidP):
        BinarySpec("M3", 0.0)
    with pytest.raises(InvalidP):
        BinarySpec("M3", 1.0)
    with pytest.raises(ValueError):
        BinarySpec("M7", 0.5)
    spec = BinarySpec("ChangePoint", 0.3, m_cp=5)
    assert BinarySpec.from_dict(spec.to_dict()) == spec


def test_m4_constant_sequences():
    x = sample_binary(BinarySpec("M4", 0.3), 20, substream(12), size=100_000)
    assert np.all((x.min(axis=1) == x.max(axis=1)))
    frac = x[:, 0].mean()
    assert abs(frac - 0.3) <= 3 * np.sqrt(0.21 / 100_000)


def test_m3_extreme_mean_probability():
    x = sample_binary(BinarySpec("M3", 0.3), 10, substream(13), size=100_000)
    m = x.mean(axis=1)
    hat = np.mean((m == 0) | (m == 1))
    exact = 0.3**10 + 0.7**10
    assert abs(hat - exact) <= 3 * np.sqrt(exact * (1 - exact) / 100_000)


@pytest.mark.parametrize("p", [1 / 3, 0.25, 0.1, 0.45, 0.7, 0.9])
def test_solve_m5_r_matches_closed_form(p):
    assert solve_m5_r(p) == pytest.approx(m5_weight_oracle(p), abs=1e-12)
    assert np.all(np.abs(m5_marginals(p, solve_m5_r(p)) - p) < 1e-12)


def test_solve_m5_r_known_values():
    assert solve_m5_r(1 / 3) == 0.5
    q = 1 / 3
    # the published formula 2q/(q+1) agrees here and nowhere else on this grid
    assert 2 * q / (q + 1) == pytest.approx(0.5)
    for p in (0.1, 0.25, 0.45):
        assert 2 * p / (p + 1) != pytest.approx(solve_m5_r(p), abs=1e-6)
    assert solve_m5_r(1e-6) == pytest.approx(0.0, abs=2e-6)


def test_branch_marginals_exact():
    q = Fraction(1, 4)
    for j in range(1, 9):
        assert m5_branch_marginals(q, j) == (q / 2, Fraction(1, 2))


@pytest.mark.parametrize("p", [0.1, 0.25, 1 / 3, 0.4])
def test_literal_first_draw_has_no_single_r(p):
    # position 2 needs q / (2 - 3q) and position 3 needs q / (1 - q)
    q = Fraction(p).limit_denominator(10**9)
    a, b = m5_branch_marginals(q, 2, "independent")
    assert (q - a) / (b - a) == q / (2 - 3 * q)
    with pytest.raises(NoValidR) as info:
        solve_m5_r(p, first_draw="independent")
    assert info.value.position == 3


def test_m5_alternating_branch_has_mean_half():
    spec = BinarySpec("M5", 0.25, r_override=1.0)
    x = sample_binary(spec, 12, substream(14), size=2000)
    assert np.all(x.mean(axis=1) == 0.5)
    assert np.all(x[:, 1::2] == 1 - x[:, 0::2])


@pytest.mark.parametrize("p", [1 / 3, 0.7])
def test_m5_empirical_marginals(p):
    x = sample_binary(BinarySpec("M5", p), 12, substream(15), size=100_000)
    se = np.sqrt(p * (1 - p) / 100_000)
    assert np.all(np.abs(x.mean(axis=0) - p) <= 4 * se)


def test_changepoint_segments():
    x = sample_binary(BinarySpec("ChangePoint", 0.2, m_cp=51, q_fixed=0.9), 100, substream(16),
                      size=20_000)
    assert abs(x[:, :50].mean() - 0.9) < 0.005
    assert abs(x[:, 50:].mean() - 0.2) < 0.005
    # m_cp = 1 has no pre-change segment: same stream, same draws as M3
    a = sample_binary(BinarySpec("ChangePoint", 0.3, m_cp=1), 50, substream(17), size=10)
    b = sample_binary(BinarySpec("M3", 0.3), 50, substream(17), size=10)
    assert np.array_equal(a, b)
    assert a.dtype == np.uint8


def test_changepoint_random_q_is_uniform():
    x = sample_binary(BinarySpec("ChangePoint", 0.5, m_cp=200), 199, substream(18), size=5000)
    q_hat = x.mean(axis=1)
    # mixing over q ~ U(0, 1) gives an almost-uniform spread of segment means
    assert ks_2samp(q_hat, substream(19).random(5000)).statistic < 0.05


# fixed classification models ---------------------------------------------------------

def test_fixed_class_validation():
    with pytest.raises(ValueError):
        FixedClassSpec([[2.0], [0.0]], 1.0, [0, 1])
    with pytest.raises(ValueError):
        FixedClassSpec([[0.0], [0.0]], 1.0, [0, 1])
    with pytest.raises(ValueError):
        FixedClassSpec([[0.0], [1.0]], 1.0, [0, 2])
    spec = FixedClassSpec([[0.0, 1.0], [0.0, 2.0]], 0.5, [0, 1, 1])
    assert FixedClassSpec.from_dict(spec.to_dict()).labels.tolist() == [0, 1, 1]


def test_fixed_class_zero_variance_and_moments():
    spec = FixedClassSpec([[0.0], [2.0]], 0.0, [0, 1, 0])
    assert sample_fixed_class(spec, substream(20)).ravel().tolist() == [0.0, 2.0, 0.0]
    labels = np.arange(10_000) % 2
    x = sample_fixed_class(FixedClassSpec([[0.0], [2.0]], 1.0, labels), substream(21))
    assert abs(x[labels == 0].mean()) <= 3 / np.sqrt(5000)
    within = np.concatenate([x[labels == 0] - 0.0, x[labels == 1] - 2.0]).var()
    assert abs(within - 1.0) <= 3 * np.sqrt(2 / 10_000)


def test_associated_mixture_atoms():
    mix = associated_mixture(atoms_sampler([-1.0, 1.0]), 2, 10_000, substream(22))
    assert np.allclose(mix.pop_centers.ravel(), [-1, 1])
    assert np.allclose(mix.proportions, 0.5, atol=0.02)


def test_associated_mixture_gaussian_pair():
    # oracle: mean of the mixture restricted to x > 0, by quadrature
    f = lambda x: 0.5 * norm.pdf(x, -3) + 0.5 * norm.pdf(x, 3)
    target = quad(lambda x: x * f(x), 0, 50)[0] / quad(f, 0, 50)[0]
    assert target == pytest.approx(3.00076, abs=1e-5)
    mix = associated_mixture(gaussian_mixture_sampler([-3, 3], [1, 1]), 2, 200_000, substream(23))
    assert np.allclose(mix.pop_centers.ravel(), [-target, target], atol=0.02)
    assert np.allclose(mix.proportions, 0.5, atol=0.01)
    assert mix.tie_fraction == 0.0
    labels = mix.draw_labels(1000, substream(24))
    x = mix.with_labels(labels).sample(substream(25))
    assert np.all((x.ravel() > 0) == (labels == 1))


def test_associated_mixture_degenerate():
    with pytest.raises(DegenerateBase):
        associated_mixture(atoms_sampler([0.0, 1.0], [0.9999, 0.0001]), 2, 2000, substream(26))
