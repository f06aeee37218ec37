"""Samplers for the generative models.

Covers the equicorrelated Gaussian model (through its single random effect
form), the two-level random effects model with a fixed number of groups,
the binary sequence models (i.i.d., constant, alternating mixture and the
change-point model), the Gaussian fixed classification model, and the
fixed classification model associated to an arbitrary sampleable
distribution via its population k-means Voronoi cells.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from identlab._random import as_generator
from identlab.errors import DegenerateBase, InvalidP, InvalidRho, NoValidR
from identlab.gaussian_core import EquicorrSpec

# ---------------------------------------------------------------------------
# Equicorrelated Gaussian model


def sample_m1(spec: EquicorrSpec, stream, size: int | None = None) -> np.ndarray:
    """Draw ``X_i = mu + Z + E_i`` with one shared random effect ``Z``.

    ``Z ~ N(0, rho sigma2)`` and ``E_i ~ N(0, (1 - rho) sigma2)`` i.i.d.
    Returns shape ``(n,)``, or ``(size, n)`` for ``size`` independent
    replicates of the whole sequence.
    """
    rng = as_generator(stream)
    shape = (1 if size is None else size, spec.n)
    z = rng.standard_normal((shape[0], 1)) * np.sqrt(spec.rho * spec.sigma2)
    e = rng.standard_normal(shape) * np.sqrt(spec.residual_variance)
    x = spec.mu + z + e
    return x[0] if size is None else x


def matched_pair(rho1: float, rho2: float, sigma1_2: float) -> float:
    """Variance ``sigma2_2`` giving ``(rho2, sigma2_2)`` the residual variance of ``(rho1, sigma1_2)``."""
    for rho in (rho1, rho2):
        if not 0.0 <= rho < 1.0:
            raise InvalidRho(f"rho must lie in [0, 1), got {rho!r}")
    if not sigma1_2 > 0:
        raise ValueError("sigma1_2 must be positive")
    return (1.0 - rho1) / (1.0 - rho2) * sigma1_2


# ---------------------------------------------------------------------------
# Two-level random effects model


@dataclass(frozen=True)
class TwoLevelSpec:
    mu: float
    tau1_2: float
    tau2_2: float
    group_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        if not sizes or min(sizes) < 1:
            raise ValueError("group_sizes must be a non-empty list of positive integers")
        if self.tau1_2 < 0 or not self.tau2_2 > 0:
            raise ValueError("need tau1_2 >= 0 and tau2_2 > 0")
        object.__setattr__(self, "group_sizes", sizes)

    @property
    def m(self) -> int:
        return len(self.group_sizes)

    @property
    def n(self) -> int:
        return sum(self.group_sizes)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "tau1_2": self.tau1_2, "tau2_2": self.tau2_2,
                "group_sizes": list(self.group_sizes)}

    @classmethod
    def from_dict(cls, d: dict) -> "TwoLevelSpec":
        return cls(float(d["mu"]), float(d["tau1_2"]), float(d["tau2_2"]),
                   tuple(d["group_sizes"]))


def sample_m2(spec: TwoLevelSpec, stream) -> list[np.ndarray]:
    """One realisation of ``X_ij = mu + Z_i + E_ij``, returned per group."""
    rng = as_generator(stream)
    z = rng.standard_normal(spec.m) * np.sqrt(spec.tau1_2)
    return [spec.mu + z[i] + rng.standard_normal(n_i) * np.sqrt(spec.tau2_2)
            for i, n_i in enumerate(spec.group_sizes)]


# ---------------------------------------------------------------------------
# Binary sequence models

BINARY_VARIANTS = ("M3", "M4", "M5", "ChangePoint")


@dataclass(frozen=True)
class BinarySpec:
    """Binary sequence model with Bernoulli(p) target marginals.

    ``M3`` is i.i.d., ``M4`` repeats its first draw forever, ``M5`` mixes an
    i.i.d. Bernoulli(p/2) branch with an alternating branch whose mean is
    exactly 1/2, and ``ChangePoint`` draws the first ``m_cp - 1`` values
    from Bernoulli(q) with ``q ~ U(0, 1)`` (or ``q_fixed``).

    ``first_draw`` selects how ``M5`` generates position 1: ``"branch"``
    draws it from the active branch (Bernoulli(p/2) or Bernoulli(1/2)),
    ``"independent"`` draws it from Bernoulli(p) regardless of the branch.
    Only the former admits a single mixing weight for every position.
    """

    variant: str
    p: float
    m_cp: int = 1
    r_override: float | None = None
    q_fixed: float | None = None
    first_draw: str = "branch"

    def __post_init__(self):
        if self.variant not in BINARY_VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 < self.p < 1.0:
            raise InvalidP(f"p must lie in (0, 1), got {self.p!r}")
        if int(self.m_cp) != self.m_cp or self.m_cp < 1:
            raise ValueError("m_cp must be a positive integer")
        if self.r_override is not None and not 0.0 <= self.r_override <= 1.0:
            raise ValueError("r_override must lie in [0, 1]")
        if self.q_fixed is not None and not 0.0 <= self.q_fixed <= 1.0:
            raise ValueError("q_fixed must lie in [0, 1]")
        if self.first_draw not in ("branch", "independent"):
            raise ValueError("first_draw must be 'branch' or 'independent'")

    def to_dict(self) -> dict:
        return {"variant": self.variant, "p": self.p, "m_cp": self.m_cp,
                "r_override": self.r_override, "q_fixed": self.q_fixed,
                "first_draw": self.first_draw}

    @classmethod
    def from_dict(cls, d: dict) -> "BinarySpec":
        return cls(variant=d["variant"], p=float(d["p"]), m_cp=int(d.get("m_cp", 1)),
                   r_override=d.get("r_override"), q_fixed=d.get("q_fixed"),
                   first_draw=d.get("first_draw", "branch"))


def _m5_cond_prob(pos: int, prefix: tuple, branch: int, q: Fraction, first_draw: str) -> Fraction:
    """P(X_pos = 1 | X_1..X_{pos-1} = prefix, Y = branch), 1-based ``pos``."""
    if pos == 1 and first_draw == "independent":
        return q
    if branch == 0:
        return q / 2
    if pos % 2 == 0:
        return Fraction(1 - prefix[-1])
    return Fraction(1, 2)


@lru_cache(maxsize=None)
def m5_branch_marginals(q: Fraction, position: int, first_draw: str = "branch") -> tuple[Fraction, Fraction]:
    """Exact ``P(X_j = 1 | Y = 0)`` and ``P(X_j = 1 | Y = 1)`` by enumeration.

    Sums the probability of every 0/1 prefix of length ``position`` ending
    in a one, for the reflected success probability ``q <= 1/2``.
    """
    out = []
    for branch in (0, 1):
        total = Fraction(0)
        for bits in itertools.product((0, 1), repeat=position):
            if bits[-1] != 1:
                continue
            prob = Fraction(1)
            for i, b in enumerate(bits):
                c = _m5_cond_prob(i + 1, bits[:i], branch, q, first_draw)
                prob *= c if b else 1 - c
                if prob == 0:
                    break
            total += prob
        out.append(total)
    return out[0], out[1]


def _reflect(p: float) -> tuple[Fraction, bool]:
    flip = p > 0.5
    # snap to a nearby simple fraction so 1/3 stays exactly 1/3
    q = Fraction(1 - p if flip else p).limit_denominator(10**9)
    return q, flip


def m5_marginals(p: float, r: float, horizon: int = 12, first_draw: str = "branch") -> np.ndarray:
    """Exact ``P(X_j = 1)`` for ``j = 1..horizon`` under M5 with weight ``r``."""
    q, flip = _reflect(p)
    r = Fraction(r)
    vals = []
    for j in range(1, horizon + 1):
        a, b = m5_branch_marginals(q, j, first_draw)
        m = (1 - r) * a + r * b
        vals.append(float(1 - m if flip else m))
    return np.array(vals)


def solve_m5_r(p: float, horizon: int = 12, first_draw: str = "branch") -> float:
    """Mixing weight making every M5 marginal up to ``horizon`` Bernoulli(p).

    Each position gives a linear equation in ``r`` solved exactly from the
    enumerated branch marginals; all positions must agree on one ``r`` in
    ``[0, 1]``. Values of ``p`` above 1/2 are handled by reflection.
    """
    if not 0.0 < p < 1.0:
        raise InvalidP(f"p must lie in (0, 1), got {p!r}")
    q, _ = _reflect(p)
    r = None
    for j in range(1, horizon + 1):
        a, b = m5_branch_marginals(q, j, first_draw)
        if a == b:
            if a != q:
                raise NoValidR(f"position {j}: marginal is {a} for every r", position=j)
            continue
        r_j = (q - a) / (b - a)
        if not 0 <= r_j <= 1:
            raise NoValidR(f"position {j}: required r={float(r_j):.6g} outside [0, 1]", position=j)
        if r is not None and r_j != r:
            raise NoValidR(f"position {j}: requires r={float(r_j):.6g}, earlier positions "
                           f"require r={float(r):.6g}", position=j)
        r = r_j
    return float(r if r is not None else 0)


def _m5_weight(spec: BinarySpec) -> float:
    return spec.r_override if spec.r_override is not None else solve_m5_r(spec.p, first_draw=spec.first_draw)


def sample_binary(spec: BinarySpec, n: int, stream, size: int | None = None) -> np.ndarray:
    """Bit sequences of length ``n`` as ``uint8``; ``size`` adds a replicate axis."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_generator(stream)
    reps = 1 if size is None else size
    p = spec.p
    if spec.variant == "M3" or (spec.variant == "ChangePoint" and spec.m_cp <= 1):
        # a change point at position 1 leaves no pre-change segment
        x = rng.random((reps, n)) < p
    elif spec.variant == "M4":
        x = np.repeat(rng.random((reps, 1)) < p, n, axis=1)
    elif spec.variant == "M5":
        x = _sample_m5(spec, n, reps, rng)
    else:
        q = rng.random((reps, 1)) if spec.q_fixed is None else np.full((reps, 1), spec.q_fixed)
        pos = np.arange(1, n + 1)
        probs = np.where(pos < spec.m_cp, q, p)
        x = rng.random((reps, n)) < probs
    x = x.astype(np.uint8)
    return x[0] if size is None else x


def _sample_m5(spec: BinarySpec, n: int, reps: int, rng: np.random.Generator) -> np.ndarray:
    qf, flip = _reflect(spec.p)
    q = float(qf)
    r = _m5_weight(spec)
    y = rng.random((reps, 1)) < r
    u = rng.random((reps, n))
    iid = u < q / 2
    alt = u < 0.5
    # even positions (1-based) copy the complement of their predecessor
    alt[:, 1::2] = ~alt[:, 0:n - 1:2]
    if spec.first_draw == "independent":
        first = u[:, 0] < q
        iid[:, 0] = first
        alt[:, 0] = first
        if n > 1:
            alt[:, 1] = ~first
    x = np.where(y, alt, iid)
    return ~x if flip else x


# ---------------------------------------------------------------------------
# Fixed classification models


def _lex_strictly_increasing(centers: np.ndarray) -> bool:
    for a, b in zip(centers[:-1], centers[1:]):
        diff = np.nonzero(a != b)[0]
        if diff.size == 0 or a[diff[0]] > b[diff[0]]:
            return False
    return True


@dataclass(frozen=True, eq=False)
class FixedClassSpec:
    """Spherical Gaussian clusters with fixed 0-based labels, one per row."""

    centers: np.ndarray
    sigma2: float
    labels: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[:, None]
        labels = np.asarray(self.labels, dtype=int)
        if centers.shape[0] < 2:
            raise ValueError("need k > 1 centers")
        if not _lex_strictly_increasing(centers):
            raise ValueError("centers must be pairwise distinct and lexicographically ordered")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if labels.ndim != 1 or labels.min(initial=0) < 0 or labels.max(initial=0) >= centers.shape[0]:
            raise ValueError("labels must be a 1-D array of indices into centers")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def sample(self, stream, n: int | None = None) -> np.ndarray:
        return sample_fixed_class(self, stream, n)

    def to_dict(self) -> dict:
        return {"centers": self.centers.tolist(), "sigma2": self.sigma2,
                "labels": self.labels.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FixedClassSpec":
        return cls(np.asarray(d["centers"], dtype=float), float(d["sigma2"]),
                   np.asarray(d["labels"], dtype=int))


def sample_fixed_class(spec: FixedClassSpec, stream, n: int | None = None) -> np.ndarray:
    """Row ``i`` drawn from ``N(centers[labels[i]], sigma2 I)``; first ``n`` rows only if given."""
    rng = as_generator(stream)
    labels = spec.labels if n is None else spec.labels[:n]
    noise = rng.standard_normal((labels.size, spec.centers.shape[1]))
    return spec.centers[labels] + np.sqrt(spec.sigma2) * noise


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def gaussian_mixture_sampler(means, sds, weights=None) -> Sampler:
    """Sampler for a one-dimensional Gaussian mixture; returns ``(size, 1)`` arrays."""
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    w = np.full(means.size, 1.0 / means.size) if weights is None else np.asarray(weights, float)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(means.size, size=size, p=w)
        return (means[comp] + sds[comp] * rng.standard_normal(size))[:, None]

    draw.spec = {"kind": "gaussian_mixture", "means": means.tolist(),
                 "sds": sds.tolist(), "weights": w.tolist()}
    return draw


def atoms_sampler(points, weights=None) -> Sampler:
    """Sampler for a discrete distribution on finitely many points in R^p."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    w = np.full(len(pts), 1.0 / len(pts)) if weights is None else np.asarray(weights, float)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return pts[rng.choice(len(pts), size=size, p=w)]

    draw.spec = {"kind": "atoms", "points": pts.tolist(), "weights": w.tolist()}
    return draw


def base_sampler_from_dict(d: dict) -> Sampler:
    if d["kind"] == "gaussian_mixture":
        return gaussian_mixture_sampler(d["means"], d["sds"], d.get("weights"))
    if d["kind"] == "atoms":
        return atoms_sampler(d["points"], d.get("weights"))
    raise ValueError(f"unknown base sampler kind {d['kind']!r}")


@dataclass(frozen=True, eq=False)
class MixtureFixedClassSpec:
    """Fixed classification model built from the Voronoi cells of ``P``.

    ``pop_centers`` approximate the population k-means centers of the base
    distribution; component ``j`` is the base restricted to cell ``j``.
    """

    base_sampler: Sampler = field(repr=False)
    k: int
    pop_centers: np.ndarray
    proportions: np.ndarray
    labels: np.ndarray | None = None
    tie_fraction: float = 0.0

    def draw_labels(self, count: int, stream) -> np.ndarray:
        """I.i.d. categorical labels; hold the result fixed across replicates."""
        rng = as_generator(stream)
        return rng.choice(self.k, size=count, p=self.proportions)

    def with_labels(self, labels) -> "MixtureFixedClassSpec":
        return MixtureFixedClassSpec(self.base_sampler, self.k, self.pop_centers,
                                     self.proportions, np.asarray(labels, dtype=int),
                                     self.tie_fraction)

    def sample(self, stream, n: int | None = None, labels=None) -> np.ndarray:
        """Row ``i`` drawn from the base restricted to cell ``labels[i]`` by rejection."""
        from identlab.kmeans import assign

        rng = as_generator(stream)
        labels = self.labels if labels is None else np.asarray(labels, dtype=int)
        if labels is None:
            raise ValueError("no labels: pass labels or use with_labels()")
        if n is not None:
            labels = labels[:n]
        need = np.bincount(labels, minlength=self.k)
        pools = [[] for _ in range(self.k)]
        have = np.zeros(self.k, dtype=int)
        batch = max(64, int(1.2 * labels.size / max(self.proportions.min(), 1e-3)))
        while np.any(have < need):
            x = self.base_sampler(rng, batch)
            cell, _ = assign(x, self.pop_centers)
            for j in range(self.k):
                if have[j] < need[j]:
                    got = x[cell == j][: need[j] - have[j]]
                    pools[j].append(got)
                    have[j] += len(got)
        out = np.empty((labels.size, self.pop_centers.shape[1]))
        for j in range(self.k):
            if need[j]:
                out[labels == j] = np.concatenate(pools[j])[: need[j]]
        return out

    def to_dict(self) -> dict:
        return {"base": getattr(self.base_sampler, "spec", None), "k": self.k,
                "pop_centers": self.pop_centers.tolist(),
                "proportions": self.proportions.tolist(),
                "tie_fraction": self.tie_fraction}


def associated_mixture(base_sampler: Sampler, k: int, approx_budget: int = 10**6,
                       stream=None, restarts: int = 4, n_labels: int = 0,
                       min_cell: int = 10) -> MixtureFixedClassSpec:
    """Approximate the Voronoi mixture decomposition of ``base_sampler``.

    Population centers come from k-means on ``approx_budget`` reference
    draws; proportions are the empirical cell masses. ``tie_fraction`` is
    the share of reference points equidistant (to 1e-12) from two centers.
    """
    from identlab.kmeans import lloyd, squared_distances

    if k < 2:
        raise ValueError("k must be greater than 1")
    rng = as_generator(stream)
    ref = np.asarray(base_sampler(rng, approx_budget), dtype=float)
    if ref.ndim == 1:
        ref = ref[:, None]
    fit = lloyd(ref, k, restarts=restarts, stream=rng)
    counts = np.bincount(fit.labels, minlength=k)
    if counts.min() < min_cell:
        raise DegenerateBase(f"a Voronoi cell holds only {counts.min()} reference points")
    d2 = np.sort(squared_distances(ref, fit.centers), axis=1)
    ties = np.isclose(d2[:, 0], d2[:, 1], rtol=1e-12, atol=1e-12)
    spec = MixtureFixedClassSpec(base_sampler, k, fit.centers, counts / counts.sum(),
                                 None, float(ties.mean()))
    if n_labels:
        spec = spec.with_labels(spec.draw_labels(n_labels, rng))
    return spec
