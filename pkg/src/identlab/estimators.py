"""Estimators whose (in)consistency the models exhibit, and a change-point scan."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from identlab._random import as_generator, substream
from identlab.errors import DegenerateSample, InsufficientData

RHO_MAX = 1.0 - 1e-9


@dataclass(frozen=True)
class RhoEstimate:
    rho_hat: float
    lambda1_hat: float
    lambda2_hat: float


def _rho_from_lambdas(lam1, lam2, n):
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (lam1 - lam2) / (lam1 + (n - 1) * lam2)
    return np.clip(rho, 0.0, RHO_MAX)


def rho_hat_from_stats(n: int, xbar, ss, mu: float):
    """Vectorised known-mean estimate from sufficient statistics.

    ``xbar`` are sample means and ``ss`` residual sums of squares
    ``sum (x_i - xbar)^2``; arrays broadcast.
    """
    lam1 = n * (np.asarray(xbar) - mu) ** 2
    lam2 = np.asarray(ss) / (n - 1)
    return _rho_from_lambdas(lam1, lam2, n)


def rho_mle_known_mu(x, mu: float) -> RhoEstimate:
    """Likelihood maximiser of the correlation when the common mean is known.

    The covariance has eigenvalue ``sigma2 (1 + (n-1) rho)`` along the
    all-ones direction and ``sigma2 (1 - rho)`` on its complement, so the
    two eigen-variances are estimated separately and mapped back to rho,
    clipped to ``[0, 1 - 1e-9]``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise InsufficientData("need at least two observations")
    xbar = x.mean()
    ss = float(np.sum((x - xbar) ** 2))
    lam1 = n * (xbar - mu) ** 2
    lam2 = ss / (n - 1)
    if lam1 == 0 and lam2 == 0:
        raise DegenerateSample("all observations equal the known mean")
    return RhoEstimate(float(_rho_from_lambdas(lam1, lam2, n)), float(lam1), float(lam2))


def rho_mle_replicated(X, mu: float) -> RhoEstimate:
    """Known-mean estimate pooled over independent replicate sequences (rows of ``X``)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    reps, n = X.shape
    if n < 2:
        raise InsufficientData("each replicate needs at least two observations")
    xbar = X.mean(axis=1)
    lam1 = float(np.mean(n * (xbar - mu) ** 2))
    lam2 = float(np.sum((X - xbar[:, None]) ** 2) / (reps * (n - 1)))
    if lam1 == 0 and lam2 == 0:
        raise DegenerateSample("all observations equal the known mean")
    return RhoEstimate(float(_rho_from_lambdas(lam1, lam2, n)), lam1, lam2)


def residual_sum_squares(x, axis=-1):
    """``sum (x_i - xbar)^2``: a statistic of the residuals only."""
    x = np.asarray(x, dtype=float)
    return np.sum((x - x.mean(axis=axis, keepdims=True)) ** 2, axis=axis)


def rho_hat_invariant(x, sigma2_ref: float = 1.0, axis=-1):
    """Location-invariant plug-in ``1 - s^2 / sigma2_ref``, clipped to ``[0, 1)``.

    Depends on the sample only through its residuals, so it cannot see the
    mean direction at all.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    s2 = residual_sum_squares(x, axis=axis) / (n - 1)
    return np.clip(1.0 - s2 / sigma2_ref, 0.0, RHO_MAX)


@dataclass(frozen=True)
class VarCompEstimate:
    tau2_2_hat: float
    grand_mean: float
    group_means: np.ndarray


def var_components_m2(groups) -> VarCompEstimate:
    """Pooled within-group variance, grand mean and group means.

    ``tau2_2_hat = sum_i sum_j (x_ij - xbar_i)^2 / (n - m)``.
    """
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    groups = [g for g in groups if g.size]
    n = sum(g.size for g in groups)
    m = len(groups)
    if m == 0 or n - m < 1:
        raise InsufficientData("need at least one group with two or more observations")
    means = np.array([g.mean() for g in groups])
    within = sum(float(np.sum((g - mu_i) ** 2)) for g, mu_i in zip(groups, means))
    grand = float(np.concatenate(groups).mean())
    return VarCompEstimate(within / (n - m), grand, means)


@dataclass(frozen=True)
class ScanResult:
    statistic: float
    split_index: int
    p_value: float


def scan_statistic(X) -> tuple[np.ndarray, np.ndarray]:
    """Max standardised before/after mean difference over all splits.

    ``X`` has shape ``(n,)`` or ``(reps, n)``. Split ``t`` compares the
    first ``t`` values with the remaining ``n - t``, standardised by the
    pooled Bernoulli variance. Constant sequences get statistic 0 and
    split 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    t = np.arange(1, n)
    cs = np.cumsum(X, axis=1)[:, :-1]
    total = cs[:, -1:] + X[:, -1:] if n > 1 else X.sum(axis=1, keepdims=True)
    phat = total / n
    diff = cs / t - (total - cs) / (n - t)
    var = phat * (1 - phat) * (1.0 / t + 1.0 / (n - t))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, np.abs(diff) / np.sqrt(np.where(var > 0, var, 1.0)), 0.0)
    best = np.argmax(z, axis=1)
    stat = z[np.arange(X.shape[0]), best]
    split = np.where(stat > 0, best + 1, 0)
    return stat, split


def _null_statistics(n: int, phat: float, reps: int, rng) -> np.ndarray:
    return scan_statistic(rng.random((reps, n)) < phat)[0]


def _exceed_fraction(null: np.ndarray, observed: float) -> float:
    return float(np.mean(null >= observed * (1 - 1e-12)))


def changepoint_scan(x, null_reps: int = 2000, stream=None) -> ScanResult:
    """Scan for a single change in a binary sequence, calibrated by simulation.

    The p-value is the fraction of ``null_reps`` i.i.d. Bernoulli(phat)
    sequences of the same length whose statistic is at least the observed
    one. A constant sequence returns p-value 1.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size < 4:
        raise InsufficientData("need a 1-D sequence of length >= 4")
    stat, split = scan_statistic(x)
    phat = float(x.mean())
    if phat in (0.0, 1.0):
        return ScanResult(0.0, 0, 1.0)
    rng = as_generator(stream)
    null = _null_statistics(x.size, phat, null_reps, rng)
    return ScanResult(float(stat[0]), int(split[0]), _exceed_fraction(null, float(stat[0])))


def changepoint_pvalues(X, null_reps: int, seed: int) -> np.ndarray:
    """Scan p-values for many sequences sharing one length.

    Null distributions depend only on the number of ones, so one is
    simulated per distinct count, from ``substream(seed, n, count)``.
    """
    X = np.atleast_2d(np.asarray(X))
    n = X.shape[1]
    stat, _ = scan_statistic(X)
    counts = X.sum(axis=1).astype(int)
    out = np.ones(X.shape[0])
    for c in np.unique(counts):
        if c in (0, n):
            continue
        null = _null_statistics(n, c / n, null_reps, substream(seed, n, int(c)))
        idx = np.nonzero(counts == c)[0]
        out[idx] = [_exceed_fraction(null, s) for s in stat[idx]]
    return out
