"""k-means: Lloyd's algorithm, an exhaustive oracle, and membership experiments.

Labels are 0-based indices into lexicographically ordered centers. Ties in
every argmin go to the lowest index.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from identlab._random import as_generator
from identlab._stats import Interval, clopper_pearson
from identlab.errors import NumericalFailure, TooFewPoints, TooLarge

BRUTE_FORCE_LIMIT = 10**7
# Upper bound on restarts * n * k * p floats held at once by lloyd
_LLOYD_MEMORY = 4_000_000


@dataclass(frozen=True, eq=False)
class KMeansFit:
    centers: np.ndarray
    labels: np.ndarray
    objective: float
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def to_dict(self) -> dict:
        return {"centers": self.centers.tolist(), "labels": self.labels.tolist(),
                "objective": self.objective}


def _as_data(data) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("data must be 1-D or 2-D")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contain non-finite values")
    return X


def squared_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("nkp,nkp->nk", diff, diff)


def assign(X, centers) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-center labels and squared distances for each row of ``X``."""
    X = _as_data(X)
    centers = np.asarray(centers, dtype=float).reshape(-1, X.shape[1])
    d2 = squared_distances(X, centers)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(X)), labels]


def voronoi_assign(x, centers) -> int:
    """Index of the center nearest to the single point ``x``."""
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        centers = centers[:, None]
    if centers.shape[0] == 0:
        raise ValueError("centers must be non-empty")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return int(assign(x, centers)[0][0])


def objective(data, centers, labels) -> float:
    """Sum of squared distances of each point to its assigned center."""
    X = _as_data(data)
    centers = np.asarray(centers, dtype=float).reshape(-1, X.shape[1])
    diff = X - centers[np.asarray(labels)]
    return float(np.einsum("np,np->", diff, diff))


def lex_order(centers) -> np.ndarray:
    """Permutation sorting center rows lexicographically (first coordinate first)."""
    centers = np.asarray(centers, dtype=float)
    return np.lexsort(centers.T[::-1])


def lex_sort(centers, labels) -> tuple[np.ndarray, np.ndarray]:
    """Reorder centers lexicographically and remap labels to match."""
    centers = np.asarray(centers, dtype=float)
    order = lex_order(centers)
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    return centers[order], inverse[np.asarray(labels)]


def _finalize(X: np.ndarray, centers: np.ndarray, history=()) -> KMeansFit:
    centers = centers[lex_order(centers)]
    labels, _ = assign(X, centers)
    return KMeansFit(centers, labels, objective(X, centers, labels), list(history))


def _init_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    idx = rng.choice(n, size=k, replace=False)
    # redraw duplicates so a restart starts from k distinct points when possible
    for _ in range(100):
        _, first = np.unique(X[idx], axis=0, return_index=True)
        if first.size == k:
            break
        dup = np.setdiff1d(np.arange(k), first)
        idx[dup] = rng.integers(0, n, size=dup.size)
    return X[idx]


def _lloyd_batch(X, C, max_iter, tol):
    """Run Lloyd iterations on a stack of restarts ``C`` of shape (R, k, p)."""
    R, k, p = C.shape
    n = X.shape[0]
    offsets = (k * np.arange(R))[:, None]
    prev = np.full(R, np.inf)
    prev_labels = None
    active = np.ones(R, dtype=bool)
    histories = [[] for _ in range(R)]
    for _ in range(max_iter):
        # running minimum over centers; strict < keeps ties at the lower index
        best = None
        for j in range(k):
            diff = X[None, :, :] - C[:, j, None, :]
            dj = np.einsum("rnp,rnp->rn", diff, diff)
            if best is None:
                best, labels = dj, np.zeros((R, n), dtype=np.intp)
            else:
                closer = dj < best
                best = np.where(closer, dj, best)
                labels[closer] = j
        obj = best.sum(axis=1)
        for r in np.nonzero(active)[0]:
            histories[r].append(float(obj[r]))
        if np.any(obj[active] > prev[active] * (1 + 1e-12) + 1e-12):
            raise NumericalFailure("Lloyd objective increased between iterations")
        done = np.isfinite(prev) & (np.abs(prev - obj) <= tol * np.abs(prev))
        if prev_labels is not None:
            done |= np.all(labels == prev_labels, axis=1)
        active &= ~done
        prev, prev_labels = obj, labels
        if not active.any():
            break
        flat = (labels + offsets).ravel()
        counts = np.bincount(flat, minlength=R * k).reshape(R, k)
        sums = np.stack([np.bincount(flat, weights=np.broadcast_to(X[:, d], (R, n)).ravel(),
                                     minlength=R * k) for d in range(p)], axis=-1).reshape(R, k, p)
        new = np.where(counts[..., None] > 0, sums / np.maximum(counts, 1)[..., None], C)
        C = np.where(active[:, None, None], new, C)
    return C, prev, histories


def lloyd(data, k: int, restarts: int = 32, max_iter: int = 500, tol: float = 1e-10,
          stream=None) -> KMeansFit:
    """Best of ``restarts`` Lloyd runs from random k-subsets of the data.

    Each run alternates nearest-center assignment and mean updates until
    the relative objective change drops below ``tol``. An empty cluster
    keeps its previous center. Raises NumericalFailure if the objective
    ever increases.
    """
    X = _as_data(data)
    n, p = X.shape
    if n < k:
        raise TooFewPoints(f"need at least k={k} points, got {n}")
    rng = as_generator(stream)
    starts = np.stack([_init_centers(X, k, rng) for _ in range(restarts)])
    chunk = max(1, _LLOYD_MEMORY // (n * k * p))
    best = (np.inf, None, None)
    for s in range(0, restarts, chunk):
        C, obj, hist = _lloyd_batch(X, starts[s:s + chunk], max_iter, tol)
        r = int(np.argmin(obj))
        if obj[r] < best[0]:
            best = (obj[r], C[r], hist[r])
    return _finalize(X, best[1], best[2])


def brute_force_kmeans(data, k: int) -> KMeansFit:
    """Exact global minimum of the k-means objective by enumerating labelings.

    Only assignments using all ``k`` clusters are scored; moving a point
    into an empty cluster never raises the objective, so nothing is lost.
    """
    X = _as_data(data)
    n, p = X.shape
    if n < k:
        raise TooFewPoints(f"need at least k={k} points, got {n}")
    total = k**n
    if total > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"k^n = {total} exceeds {BRUTE_FORCE_LIMIT}")
    sq = float(np.einsum("np,np->", X, X))
    powers = k ** np.arange(n)
    best_w, best_code = np.inf, None
    step = 1 << 15
    for start in range(0, total, step):
        codes = np.arange(start, min(start + step, total))
        labels = (codes[:, None] // powers) % k
        onehot = (labels[..., None] == np.arange(k)).astype(float)
        counts = onehot.sum(axis=1)
        sums = np.einsum("cnk,np->ckp", onehot, X)
        full = np.all(counts > 0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = sq - np.nansum(np.einsum("ckp,ckp->ck", sums, sums) / counts, axis=1)
        w[~full] = np.inf
        i = int(np.argmin(w))
        if w[i] < best_w:
            best_w, best_code = w[i], codes[i]
    labels = (best_code // powers) % k
    centers = np.stack([X[labels == j].mean(axis=0) for j in range(k)])
    return _finalize(X, centers)


def misclassification_floor(delta: float, sigma: float) -> float:
    """``Phi(-delta / (2 sigma))``: chance a point lands nearer the other of two centers."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return float(ndtr(-delta / (2.0 * sigma)))


@dataclass
class ConsistencyRow:
    n: int
    reps: int
    frac_correct: float
    ci: Interval


@dataclass
class ConsistencyTable:
    rows: list[ConsistencyRow]
    level: float = 0.99

    @property
    def fractions(self) -> np.ndarray:
        return np.array([r.frac_correct for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "reps", "frac_correct", "ci_lo", "ci_hi"])
        for r in self.rows:
            w.writerow([r.n, r.reps, repr(r.frac_correct), repr(r.ci.lower), repr(r.ci.upper)])
        return buf.getvalue()


def membership_consistency_experiment(model, n_grid, reps: int, stream=None,
                                      restarts: int = 8, level: float = 0.99) -> ConsistencyTable:
    """Fraction of replicates in which k-means recovers the label of point 1.

    ``model`` must expose ``labels``, ``k`` and ``sample(rng, n)`` (both
    fixed classification spec types do). For every ``n`` fresh data are
    drawn, k-means is fitted, and point 1 is assigned to its nearest fitted
    center; the label sequence itself never changes.
    """
    rng = as_generator(stream)
    target = int(model.labels[0])
    rows = []
    for n in n_grid:
        if len(model.labels) < n:
            raise ValueError(f"model holds {len(model.labels)} labels, need {n}")
        hits = 0
        for _ in range(reps):
            X = model.sample(rng, n)
            fit = lloyd(X, model.k, restarts=restarts, stream=rng)
            hits += voronoi_assign(X[0], fit.centers) == target
        rows.append(ConsistencyRow(int(n), reps, hits / reps, clopper_pearson(hits, reps, level)))
    return ConsistencyTable(rows, level)
