"""Pre-registered observable sets and Monte Carlo distinguishability checks.

A set is a predicate on a sample of length ``n``. Its probability under a
parameter value is estimated by simulation and bracketed by an exact
Clopper-Pearson interval; verdicts are only issued when the intervals clear
the thresholds, so simulation noise cannot create distinguishability.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from identlab._random import as_generator, child_seed, substream
from identlab._stats import Interval, KSReport, binomial_se, clopper_pearson, ks_two_sample
from identlab.errors import ArityMismatch, EqualMeans, EqualValues, GridTooNarrow, NotMatched
from identlab.estimators import residual_sum_squares
from identlab.gaussian_core import EquicorrSpec, mean_law
from identlab.models import BinarySpec, sample_binary, sample_m1

#: ``sampler(rng, reps, n)`` returns ``reps`` independent samples of length ``n``.
Sampler = Callable[[np.random.Generator, int, int], np.ndarray]

ALPHA_GRID = np.round(np.arange(1, 100) / 100, 2)
_BLOCK_FLOATS = 2_000_000


@dataclass(frozen=True)
class SetSpec:
    """Observable event: ``predicate`` maps a ``(reps, n)`` batch to ``reps`` booleans."""

    name: str
    predicate: Callable[[np.ndarray], np.ndarray]
    arity: int | None = None

    def hits(self, samples) -> np.ndarray:
        samples = np.atleast_2d(np.asarray(samples))
        if self.arity is not None and samples.shape[1] != self.arity:
            raise ArityMismatch(f"set {self.name!r} needs n={self.arity}, got {samples.shape[1]}")
        return np.asarray(self.predicate(samples), dtype=bool).reshape(samples.shape[0])

    def __call__(self, sample) -> bool:
        return bool(self.hits(np.asarray(sample)[None, :])[0])

    def complement(self) -> "SetSpec":
        return SetSpec(f"not({self.name})", lambda s: ~np.asarray(self.predicate(s), bool), self.arity)


def always_false(name: str = "always false") -> SetSpec:
    return SetSpec(name, lambda s: np.zeros(s.shape[0], dtype=bool))


def extreme_mean_set() -> SetSpec:
    """``{xbar in {0, 1}}`` for binary samples: all zeros or all ones."""
    def pred(s):
        m = s.mean(axis=1)
        return (m == 0) | (m == 1)
    return SetSpec("xbar in {0,1}", pred)


def half_mean_set() -> SetSpec:
    """``{xbar = 1/2}`` for binary samples of even length."""
    return SetSpec("xbar == 1/2", lambda s: 2 * s.sum(axis=1) == s.shape[1])


def mean_above_set(threshold: float = 0.0) -> SetSpec:
    return SetSpec(f"xbar > {threshold:g}", lambda s: s.mean(axis=1) > threshold)


def mu_distinguishing_set(mu1: float, mu2: float) -> SetSpec:
    """``{|xbar - mu1| > |xbar - mu2|}``: the sample mean sits nearer ``mu2``."""
    if mu1 == mu2:
        raise EqualMeans("mu1 and mu2 must differ")

    def pred(s):
        m = s.mean(axis=1)
        return np.abs(m - mu1) > np.abs(m - mu2)

    return SetSpec(f"|xbar-{mu1:g}| > |xbar-{mu2:g}|", pred)


def estimator_set(estimator, lambda1, lambda2, metric=None, name: str | None = None) -> SetSpec:
    """``{d(estimate, lambda2) <= d(lambda1, lambda2) / 3}`` (closed ball).

    ``estimator`` maps a ``(reps, n)`` batch to ``reps`` estimates.
    ``metric`` defaults to absolute difference.
    """
    metric = metric or (lambda a, b: np.abs(np.asarray(a, float) - np.asarray(b, float)))
    dist = float(metric(lambda1, lambda2))
    if dist == 0:
        raise EqualValues("lambda1 and lambda2 must differ")
    eps = dist / 3.0
    return SetSpec(name or f"estimate in B({lambda2:g}, {eps:g})",
                   lambda s: metric(estimator(s), lambda2) <= eps)


def location_invariant_set(statistic, threshold: float, name: str) -> SetSpec:
    """``{statistic(x - xbar) > threshold}``; never looks at the mean direction."""
    def pred(s):
        return statistic(s - s.mean(axis=1, keepdims=True)) > threshold
    return SetSpec(name, pred)


# samplers -------------------------------------------------------------------

def m1_sampler(mu: float, sigma2: float, rho: float) -> Sampler:
    def draw(rng, reps, n):
        return sample_m1(EquicorrSpec(n, mu, sigma2, rho), rng, size=reps)
    return draw


def binary_sampler(spec: BinarySpec) -> Sampler:
    def draw(rng, reps, n):
        return sample_binary(spec, n, rng, size=reps)
    return draw


def normal_iid_sampler(theta: float, sd: float = 1.0) -> Sampler:
    def draw(rng, reps, n):
        return theta + sd * rng.standard_normal((reps, n))
    return draw


# estimation -----------------------------------------------------------------

@dataclass(frozen=True)
class SetProbability:
    p_hat: float
    ci: Interval
    hits: int
    reps: int

    @property
    def se(self) -> float:
        return binomial_se(self.p_hat, self.reps)


def estimate_set_prob(sampler: Sampler, set_spec: SetSpec, n: int, reps: int, stream=None,
                      level: float = 0.99) -> SetProbability:
    """Hit fraction of ``set_spec`` over ``reps`` simulated samples, with exact CI."""
    if reps < 100:
        raise ValueError("reps must be at least 100")
    if set_spec.arity is not None and set_spec.arity != n:
        raise ArityMismatch(f"set {set_spec.name!r} needs n={set_spec.arity}, got {n}")
    rng = as_generator(stream)
    block = max(1, _BLOCK_FLOATS // max(n, 1))
    hits = 0
    for start in range(0, reps, block):
        size = min(block, reps - start)
        hits += int(set_spec.hits(sampler(rng, size, n)).sum())
    return SetProbability(hits / reps, clopper_pearson(hits, reps, level), hits, reps)


@dataclass(frozen=True)
class Verdict:
    kind: str
    alpha: float | None = None
    beta: float | None = None

    def __str__(self) -> str:
        if self.kind == "NotEstablished":
            return self.kind
        return f"{self.kind}({self.alpha:g},{self.beta:g})"

    @property
    def established(self) -> bool:
        return self.kind != "NotEstablished"


def classify(ci1: Interval, ci2: Interval, alpha: float, beta: float) -> Verdict:
    """Verdict for a candidate ``(alpha, beta)`` given the two intervals."""
    if not 0 < alpha <= beta <= 1:
        raise ValueError("need 0 < alpha <= beta <= 1")
    if ci1.upper <= alpha and ci2.lower > beta:
        return Verdict("GapDistinguishing" if alpha < beta else "Distinguishing", alpha, beta)
    return Verdict("NotEstablished")


def search_alpha(ci1: Interval, ci2: Interval, grid=ALPHA_GRID) -> Verdict:
    """Smallest grid ``alpha`` with ``ci1.upper <= alpha < ci2.lower``."""
    for a in grid:
        if ci1.upper <= a < ci2.lower:
            return Verdict("Distinguishing", float(a), float(a))
    return Verdict("NotEstablished")


@dataclass(frozen=True)
class DistinguishReport:
    set_name: str
    n: int
    reps: int
    p1_hat: float
    ci1: Interval
    p2_hat: float
    ci2: Interval
    verdict: Verdict
    level: float = 0.99

    def to_dict(self) -> dict:
        return {"set": self.set_name, "n": self.n, "reps": self.reps,
                "p1_hat": self.p1_hat, "p1_lo": self.ci1.lower, "p1_hi": self.ci1.upper,
                "p2_hat": self.p2_hat, "p2_lo": self.ci2.lower, "p2_hi": self.ci2.upper,
                "verdict": str(self.verdict), "level": self.level}


REPORT_COLUMNS = ["set", "n", "reps", "p1_hat", "p1_lo", "p1_hi",
                  "p2_hat", "p2_lo", "p2_hi", "verdict"]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        d = r.to_dict()
        w.writerow([d[c] if isinstance(d[c], (str, int)) else repr(d[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def check_distinguishing(set_spec: SetSpec, sampler1: Sampler, sampler2: Sampler, n: int,
                         alpha: float | None, beta: float | None, reps: int, stream=None,
                         level: float = 0.99, swap: bool = False) -> DistinguishReport:
    """Estimate ``P1(A)`` and ``P2(A)`` and decide whether ``A`` distinguishes.

    With ``alpha=None`` the alpha grid is searched for a common threshold.
    ``swap=True`` checks the reverse direction: the complement set with
    the samplers exchanged and thresholds ``(1 - beta, 1 - alpha)``.
    """
    if swap:
        set_spec = set_spec.complement()
        sampler1, sampler2 = sampler2, sampler1
        if alpha is not None:
            alpha, beta = 1.0 - beta, 1.0 - alpha
    seed = child_seed(as_generator(stream))
    e1 = estimate_set_prob(sampler1, set_spec, n, reps, substream(seed, 1), level)
    e2 = estimate_set_prob(sampler2, set_spec, n, reps, substream(seed, 2), level)
    if alpha is None:
        verdict = search_alpha(e1.ci, e2.ci)
    else:
        verdict = classify(e1.ci, e2.ci, alpha, alpha if beta is None else beta)
    return DistinguishReport(set_spec.name, n, reps, e1.p_hat, e1.ci, e2.p_hat, e2.ci, verdict, level)


def check_on_pairs(set_spec: SetSpec, pairs, n: int, alpha: float, reps: int, stream=None,
                   level: float = 0.99) -> tuple[bool, list[DistinguishReport]]:
    """One set against every ``(sampler1, sampler2)`` pair at a common ``alpha``.

    Returns True when every pair is distinguished: the grid stand-in for
    potential distinguishability ("not refuted on grid").
    """
    rng = as_generator(stream)
    reports = [check_distinguishing(set_spec, s1, s2, n, alpha, alpha, reps, rng, level)
               for s1, s2 in pairs]
    return all(r.verdict.established for r in reports), reports


# integral identity ------------------------------------------------------------

@dataclass(frozen=True)
class IntegralResult:
    integral: float
    se: float
    mu_grid: np.ndarray
    diff: np.ndarray
    diff_se: np.ndarray

    @property
    def max_pointwise_z(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.diff_se > 0, np.abs(self.diff) / self.diff_se, 0.0)
        return float(z.max())


def power_curve_integral(set_spec: SetSpec, family1: tuple[float, float],
                         family2: tuple[float, float], mu_grid, n: int, reps: int,
                         stream=None, mass: float = 1 - 1e-6) -> IntegralResult:
    """Trapezoid integral over ``mu`` of ``P_{mu, family1}(A) - P_{mu, family2}(A)``.

    Families are ``(sigma2, rho)`` pairs of the equicorrelated model. The
    grid must hold at least ``mass`` of each family's mean law centred at
    the grid midpoint. Returns the integral with its Monte Carlo standard
    error and the pointwise differences.
    """
    grid = np.asarray(mu_grid, dtype=float)
    lo, hi = grid[0], grid[-1]
    mid = 0.5 * (lo + hi)
    for sigma2, rho in (family1, family2):
        sd = np.sqrt(mean_law(EquicorrSpec(n, mid, sigma2, rho)).variance)
        inside = norm.cdf(hi, mid, sd) - norm.cdf(lo, mid, sd)
        if inside < mass:
            raise GridTooNarrow(f"grid [{lo:g}, {hi:g}] holds only {inside:.3g} of N({mid:g}, {sd:.3g}^2)")
    seed = child_seed(as_generator(stream))
    diff = np.empty(grid.size)
    var = np.empty(grid.size)
    for i, mu in enumerate(grid):
        e1 = estimate_set_prob(m1_sampler(mu, *family1), set_spec, n, reps, substream(seed, i, 1))
        e2 = estimate_set_prob(m1_sampler(mu, *family2), set_spec, n, reps, substream(seed, i, 2))
        diff[i] = e1.p_hat - e2.p_hat
        var[i] = e1.se**2 + e2.se**2
    w = np.zeros(grid.size)
    h = np.diff(grid)
    w[:-1] += h / 2
    w[1:] += h / 2
    return IntegralResult(float(w @ diff), float(np.sqrt(w**2 @ var)), grid, diff, np.sqrt(var))


def residual_law_equality(spec1: EquicorrSpec, spec2: EquicorrSpec, statistic=None,
                          reps: int = 10_000, stream=None) -> KSReport:
    """Two-sample KS comparison of a residual statistic under two parameter sets.

    The specs must share ``n`` and the residual variance
    ``(1 - rho) sigma2``; ``statistic`` maps a ``(reps, n)`` batch to
    ``reps`` values and defaults to the residual sum of squares.
    """
    if spec1.n != spec2.n:
        raise ValueError("specs must share n")
    if abs(spec1.residual_variance - spec2.residual_variance) > 1e-12:
        raise NotMatched(f"residual variances differ: {spec1.residual_variance:g} "
                         f"vs {spec2.residual_variance:g}")
    return compare_residual_laws(spec1, spec2, statistic, reps, stream)


def compare_residual_laws(spec1: EquicorrSpec, spec2: EquicorrSpec, statistic=None,
                          reps: int = 10_000, stream=None) -> KSReport:
    """Like :func:`residual_law_equality` without the matching requirement."""
    statistic = statistic or residual_sum_squares
    seed = child_seed(as_generator(stream))
    a = statistic(sample_m1(spec1, substream(seed, 1), size=reps))
    b = statistic(sample_m1(spec2, substream(seed, 2), size=reps))
    return ks_two_sample(a, b)
