"""Exact binomial intervals and two-sample KS reports."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def clopper_pearson(hits: int, trials: int, level: float = 0.99) -> Interval:
    """Exact two-sided binomial confidence interval."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= hits <= trials:
        raise ValueError(f"hits={hits} outside [0, {trials}]")
    a = 1.0 - level
    lo = 0.0 if hits == 0 else float(stats.beta.ppf(a / 2, hits, trials - hits + 1))
    hi = 1.0 if hits == trials else float(stats.beta.ppf(1 - a / 2, hits + 1, trials - hits))
    return Interval(lo, hi)


def binomial_se(p: float, trials: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / trials))


@dataclass(frozen=True)
class KSReport:
    statistic: float
    pvalue: float
    n1: int
    n2: int

    def rejects(self, level: float) -> bool:
        return self.pvalue < level

    def to_dict(self) -> dict:
        return asdict(self)


def ks_two_sample(a, b) -> KSReport:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    res = stats.ks_2samp(a, b)
    return KSReport(float(res.statistic), float(res.pvalue), a.size, b.size)
