"""Small dense Gaussian linear algebra.

Covariance construction for the equicorrelated model, Cholesky-based
sampling, and exact conditioning of a multivariate normal on a subset of
its coordinates. The closed-form law of an equicorrelated vector given its
arithmetic mean lives here as well, together with the augmented
``(X_1, ..., X_n, Xbar)`` system used to cross-check it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from identlab._random import as_generator
from identlab.errors import IndexOutOfRange, InvalidRho, NotPositiveDefinite

#: Largest dimension for which dense covariance matrices are built.
MAX_DIM = 10_000

PIVOT_RTOL = 1e-12
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10


def _is_psd(cov: np.ndarray, scale: float) -> bool:
    try:
        np.linalg.cholesky(cov)
        return True
    except np.linalg.LinAlgError:
        return np.linalg.eigvalsh(cov)[0] >= -PSD_TOL * scale


@dataclass(frozen=True, eq=False)
class MvNormal:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        n = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (n, n):
            raise ValueError(f"shape mismatch: mean {mean.shape}, cov {cov.shape}")
        scale = max(1.0, float(np.max(np.abs(cov)))) if n else 1.0
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("covariance is not symmetric")
        if n and not _is_psd(cov, scale):
            raise NotPositiveDefinite("covariance is not positive semi-definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class EquicorrSpec:
    """Parameters of the equicorrelated Gaussian model.

    All ``n`` coordinates share mean ``mu`` and variance ``sigma2``; every
    pair has correlation ``rho`` in ``[0, 1)``.
    """

    n: int
    mu: float = 0.0
    sigma2: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not 0.0 <= self.rho < 1.0:
            raise InvalidRho(f"rho must lie in [0, 1), got {self.rho!r}")

    @property
    def residual_variance(self) -> float:
        """``(1 - rho) * sigma2``, the variance of each coordinate given the mean."""
        return (1.0 - self.rho) * self.sigma2

    def to_dict(self) -> dict:
        return {"n": self.n, "mu": self.mu, "sigma2": self.sigma2, "rho": self.rho}

    @classmethod
    def from_dict(cls, d: dict) -> "EquicorrSpec":
        return cls(n=int(d["n"]), mu=float(d.get("mu", 0.0)),
                   sigma2=float(d.get("sigma2", 1.0)), rho=float(d.get("rho", 0.0)))


@dataclass(frozen=True)
class MeanLaw:
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class CholFactor:
    L: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        return self.L @ self.L.T


def cholesky(S) -> CholFactor:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises NotPositiveDefinite when a pivot falls below
    ``1e-12 * max(diag(S))``.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"matrix must be square, got {S.shape}")
    max_diag = float(np.max(np.diag(S), initial=0.0))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(L) ** 2
    if np.min(pivots) <= PIVOT_RTOL * max_diag:
        k = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {k} is {pivots[k]:.3g}, below tolerance")
    return CholFactor(L)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Any ``F`` with ``F @ F.T == cov``; falls back to eigh for singular PSD."""
    try:
        return cholesky(cov).L
    except NotPositiveDefinite:
        w, V = np.linalg.eigh(cov)
        scale = max(1.0, float(np.max(np.abs(cov))))
        if w[0] < -PSD_TOL * scale:
            raise
        return V * np.sqrt(np.clip(w, 0.0, None))


def mvn_sample(d: MvNormal, count: int, stream) -> np.ndarray:
    """``count`` draws from ``d`` as rows of a ``(count, dim)`` array."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = as_generator(stream)
    F = _psd_factor(d.cov)
    z = rng.standard_normal((count, d.dim))
    return d.mean + z @ F.T


def mvn_condition(d: MvNormal, observed_indices, observed_values) -> MvNormal:
    """Law of the unobserved coordinates of ``d`` given the observed ones.

    Mean ``mu_1 + S_12 S_2^{-1} (z - mu_2)``, covariance
    ``S_1 - S_12 S_2^{-1} S_21``; ``S_2`` is factored, never inverted.
    """
    obs = np.atleast_1d(np.asarray(observed_indices, dtype=int))
    z = np.atleast_1d(np.asarray(observed_values, dtype=float))
    if obs.shape != z.shape:
        raise ValueError("observed_indices and observed_values differ in length")
    if obs.size and (obs.min() < 0 or obs.max() >= d.dim):
        raise IndexOutOfRange(f"observed index out of range for dimension {d.dim}")
    if len(set(obs.tolist())) != obs.size:
        raise ValueError("observed_indices contain duplicates")
    free = np.setdiff1d(np.arange(d.dim), obs)

    L2 = cholesky(d.cov[np.ix_(obs, obs)]).L
    S12 = d.cov[np.ix_(free, obs)]
    # B = L2^{-1} S21, so S12 S2^{-1} S21 = B^T B
    B = solve_triangular(L2, S12.T, lower=True)
    w = solve_triangular(L2, z - d.mean[obs], lower=True)
    mean = d.mean[free] + B.T @ w
    cov = d.cov[np.ix_(free, free)] - B.T @ B
    cov = 0.5 * (cov + cov.T)
    return MvNormal(mean, cov)


def equicorr_cov(n: int, sigma2: float, rho: float) -> np.ndarray:
    """Raw ``n x n`` equicorrelation matrix, without parameter checks."""
    cov = np.full((n, n), rho * sigma2)
    np.fill_diagonal(cov, sigma2)
    return cov


def _check_dim(n: int):
    if n > MAX_DIM:
        raise ValueError(f"dense dimension {n} exceeds MAX_DIM={MAX_DIM}")


def equicorr_mvn(spec: EquicorrSpec) -> MvNormal:
    _check_dim(spec.n)
    return MvNormal(np.full(spec.n, float(spec.mu)), equicorr_cov(spec.n, spec.sigma2, spec.rho))


def augmented_equicorr(spec: EquicorrSpec) -> MvNormal:
    """Joint law of ``(X_1, ..., X_n, Xbar_n)``.

    The last row and column are all equal to
    ``sigma2 * (1 + (n - 1) * rho) / n``. The matrix is singular by
    construction, so only the last coordinate may be conditioned on.
    """
    n = spec.n
    _check_dim(n + 1)
    s_tilde = spec.sigma2 * (1.0 + (n - 1) * spec.rho) / n
    cov = np.empty((n + 1, n + 1))
    cov[:n, :n] = equicorr_cov(n, spec.sigma2, spec.rho)
    cov[n, :] = s_tilde
    cov[:, n] = s_tilde
    return MvNormal(np.full(n + 1, float(spec.mu)), cov)


def conditional_given_mean(spec: EquicorrSpec, xbar: float) -> MvNormal:
    """Closed-form law of ``X`` given ``Xbar_n = xbar``.

    Mean is ``xbar`` in every coordinate; covariance has
    ``(1 - 1/n) * s`` on the diagonal and ``-s/n`` elsewhere with
    ``s = (1 - rho) * sigma2``. ``spec.mu`` plays no role.
    """
    n = spec.n
    _check_dim(n)
    s = spec.residual_variance
    cov = np.full((n, n), -s / n)
    np.fill_diagonal(cov, (1.0 - 1.0 / n) * s)
    return MvNormal(np.full(n, float(xbar)), cov)


def schur_conditional_given_mean(spec: EquicorrSpec, xbar: float) -> MvNormal:
    """Same law as :func:`conditional_given_mean`, via generic conditioning."""
    return mvn_condition(augmented_equicorr(spec), [spec.n], [xbar])


def mean_law(spec: EquicorrSpec) -> MeanLaw:
    """Law of the arithmetic mean: ``N(mu, (1 - rho) sigma2 / n + rho sigma2)``."""
    var = spec.residual_variance / spec.n + spec.rho * spec.sigma2
    return MeanLaw(mean=float(spec.mu), variance=var)
