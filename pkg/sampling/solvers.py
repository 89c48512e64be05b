# sampling/solvers.py
"""
Sparse reconstruction solvers for one segment.

D is the f x n_seg dictionary whose columns are the frame descriptors and
the story v is the sum of the columns. Every solver returns an
ActivationSolution whose |alpha| ranks the frames.

- solve_llc: weighted locality-constrained coding, closed form
      min ||v - D a||^2 + lam * ||diag(w) g (.) a||^2
- solve_sc:  weighted Lasso, cyclic coordinate descent, lam bisected to hit
             the requested support size
      min 1/2 ||v - D a||^2 + lam * ||diag(w) a||_1
- solve_omp: orthogonal matching pursuit with an exact atom budget
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import logsumexp
from sklearn.linear_model import Lasso

from footage.exceptions import DimensionMismatch, OutOfRangeInput

logger = logging.getLogger(__name__)

MOTION_EPS = 1e-9
WEIGHT_FLOOR = 1e-12  # exp(-motion / mean) underflows past ~745x the mean
SINGULAR_PIVOT_RATIO = 1e-8  # L pivots this far apart => cond(A) ~ 1/eps
JITTER_SCALE = 1e-10
WOODBURY_MAX_COND = 1e6  # trace(D^T D) / min penalty; beyond it the f x f system loses digits
CD_TOL = 1e-8
CD_MAX_ITER = 10000
SC_BISECTION_STEPS = 60
SC_SLACK = 1.1
OMP_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ActivationSolution:
    alpha: np.ndarray
    g: np.ndarray  # locality distances ||d_i - v||
    w: np.ndarray  # mean-normalised weights
    lam: float
    story: np.ndarray  # v
    reconstruction_error: float
    method: str = "llc"

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha != 0)


# ---------- ingredients ----------


def _as_dictionary(D) -> np.ndarray:
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[1] < 1:
        raise DimensionMismatch(f"dictionary must be f x n_seg with n_seg >= 1, got shape {D.shape}")
    return D


def _check_weights(w, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n,):
        raise DimensionMismatch(f"expected {n} weights, got shape {w.shape}")
    if np.any(w <= 0):
        raise OutOfRangeInput("weights must be > 0")
    return w


def story_vector(D: np.ndarray) -> np.ndarray:
    return D.sum(axis=1)


def locality_distances(D: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(D - v[:, None], axis=0)


def motion_weights(motion, eps: float = MOTION_EPS) -> np.ndarray:
    """
    w_i = exp(-motion_i / (mean(motion) + eps)), rescaled to mean 1.

    High-motion frames get a small penalty weight and are therefore more
    likely to be sampled. A motionless segment gets all-ones.

    Normalised in log space; a single jolt far above the segment mean is
    floored at 1e-12 rather than underflowing to zero.
    """
    motion = np.asarray(motion, dtype=np.float64)
    if motion.size == 0 or not np.any(motion > 0):
        return np.ones(motion.shape, dtype=np.float64)
    z = -motion / (motion.mean() + eps)
    w = np.maximum(np.exp(z - logsumexp(z) + math.log(motion.size)), WEIGHT_FLOOR)
    return w / w.mean()


def default_lambda(D: np.ndarray, scale: float = 0.01) -> float:
    """scale * trace(D^T D) / n_seg."""
    D = _as_dictionary(D)
    return float(scale * np.sum(D * D) / D.shape[1])


def _solution(D, v, g, w, lam, alpha, method) -> ActivationSolution:
    err = float(np.linalg.norm(v - D @ alpha))
    return ActivationSolution(alpha=alpha, g=g, w=w, lam=float(lam), story=v, reconstruction_error=err, method=method)


# ---------- weighted LLC ----------


def _cholesky_solve(A: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    try:
        c, lower = cho_factor(A, lower=True, check_finite=False)
    except LinAlgError:
        return None
    pivots = np.abs(np.diag(c))
    if pivots.min() <= SINGULAR_PIVOT_RATIO * pivots.max():
        return None
    return cho_solve((c, lower), rhs, check_finite=False)


def _woodbury_solve(D: np.ndarray, penalty: np.ndarray, v: np.ndarray) -> Optional[np.ndarray]:
    """
    (D^T D + diag(p))^-1 D^T v as diag(p)^-1 D^T (I + D diag(p)^-1 D^T)^-1 v.

    An f x f factorisation instead of n_seg x n_seg; None when a penalty
    is zero or too small next to trace(D^T D) for the short system to stay
    well conditioned.
    """
    p_min = penalty.min()
    if p_min <= 0 or float(np.sum(D * D)) > WOODBURY_MAX_COND * p_min:
        return None
    scaled = D / penalty
    inner = scaled @ D.T
    inner[np.diag_indices(D.shape[0])] += 1.0
    y = cho_solve(cho_factor(inner, lower=True, check_finite=False), v, check_finite=False)
    return scaled.T @ y


def solve_llc(D, w, lam: float) -> ActivationSolution:
    """
    Closed-form minimiser of ||v - D a||^2 + lam * ||diag(w) g (.) a||^2:

        a* = (D^T D + lam * diag((w g)^2))^-1 D^T v

    When the segment has more frames than feature dimensions the push-through
    form is solved on the f x f system instead. Otherwise the n_seg x n_seg
    normal matrix gets a Cholesky factorisation; if it is numerically
    singular a jitter of 1e-10 * trace(D^T D) / n_seg is put on the diagonal
    and the solve repeated.
    """
    D = _as_dictionary(D)
    f, n = D.shape
    w = _check_weights(w, n)
    if lam < 0:
        raise OutOfRangeInput(f"lambda must be >= 0, got {lam}")

    v = story_vector(D)
    g = locality_distances(D, v)
    penalty = lam * (w * g) ** 2
    if f < n:
        alpha = _woodbury_solve(D, penalty, v)
        if alpha is not None:
            return _solution(D, v, g, w, lam, alpha, "llc")

    gram = D.T @ D
    rhs = D.T @ v
    A = gram + np.diag(penalty)

    alpha = _cholesky_solve(A, rhs)
    if alpha is None:
        trace = float(np.trace(gram))
        jitter = JITTER_SCALE * (trace / n if trace > 0 else 1.0)
        logger.warning("Singular LLC normal matrix (n_seg=%s); adding jitter %.3g", n, jitter)
        A[np.diag_indices(n)] += jitter
        alpha = _cholesky_solve(A, rhs)
        if alpha is None:
            # a zero dictionary: jitter alone is the whole matrix
            alpha = rhs / np.diag(A)

    return _solution(D, v, g, w, lam, alpha, "llc")


# ---------- weighted Lasso ----------


def lasso_coordinate_descent(D, w, lam: float, estimator: Optional[Lasso] = None) -> np.ndarray:
    """
    One weighted-L1 solve at a fixed lambda by cyclic coordinate descent.

    The weights are folded into the columns (b_i = w_i a_i, D' = D / w) so
    the plain Lasso objective applies; sklearn scales the data term by
    1 / n_samples, hence alpha = lam / f. Passing the same ``estimator``
    across calls warm-starts from the previous coefficients.
    """
    D = _as_dictionary(D)
    f, n = D.shape
    w = _check_weights(w, n)
    if lam < 0:
        raise OutOfRangeInput(f"lambda must be >= 0, got {lam}")
    v = story_vector(D)

    if estimator is None:
        estimator = Lasso(fit_intercept=False, tol=CD_TOL, max_iter=CD_MAX_ITER, selection="cyclic", warm_start=True)
    estimator.set_params(alpha=lam / f)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        estimator.fit(D / w, v)
    for item in caught:
        logger.warning("Lasso solve (lam=%.3g): %s", lam, item.message)
    return np.asarray(estimator.coef_, dtype=np.float64) / w


def solve_sc(D, w, m: int) -> ActivationSolution:
    """
    Weighted Lasso with lambda bisected (geometrically, over
    [1e-6, 1e6] * ||D^T v||_inf) until the support size lands in
    [m, 1.1 m]. After 60 steps the closest achieved support is kept.
    """
    D = _as_dictionary(D)
    n = D.shape[1]
    w = _check_weights(w, n)
    if not 1 <= m <= n:
        raise OutOfRangeInput(f"target m must lie in [1, {n}], got {m}")

    v = story_vector(D)
    g = locality_distances(D, v)
    lam_hat = float(np.max(np.abs(D.T @ v)))
    if lam_hat == 0.0:
        return _solution(D, v, g, w, 1.0, np.zeros(n), "sc")

    estimator = Lasso(fit_intercept=False, tol=CD_TOL, max_iter=CD_MAX_ITER, selection="cyclic", warm_start=True)
    lo, hi = 1e-6 * lam_hat, 1e6 * lam_hat
    upper = math.floor(SC_SLACK * m)
    best = None  # (miss, lam, alpha)
    for _ in range(SC_BISECTION_STEPS):
        lam = math.sqrt(lo * hi)
        alpha = lasso_coordinate_descent(D, w, lam, estimator)
        nnz = int(np.count_nonzero(alpha))
        miss = 0 if m <= nnz <= upper else min(abs(nnz - m), abs(nnz - upper))
        if best is None or miss < best[0]:
            best = (miss, lam, alpha.copy())
        if miss == 0:
            break
        if nnz > upper:
            lo = lam
        else:
            hi = lam
    miss, lam, alpha = best
    if miss:
        logger.warning("Lasso bisection missed support [%s, %s] by %s; keeping closest", m, upper, miss)
    return _solution(D, v, g, w, lam, alpha, "sc")


# ---------- OMP ----------


def solve_omp(D, m: int) -> ActivationSolution:
    """
    Greedy orthogonal matching pursuit: add the atom with the largest
    normalised |correlation| with the residual, refit least squares on the
    active set, stop after m atoms, a residual below 1e-10, or when no
    remaining atom correlates with the residual (rank exhausted).
    """
    D = _as_dictionary(D)
    n = D.shape[1]
    if not 1 <= m <= n:
        raise OutOfRangeInput(f"target m must lie in [1, {n}], got {m}")

    v = story_vector(D)
    g = locality_distances(D, v)
    norms = np.linalg.norm(D, axis=0)
    usable = norms > 0
    floor = 1e-12 * max(1.0, float(np.linalg.norm(v)))

    active: list = []
    coef = np.zeros(0)
    residual = v.copy()
    for _ in range(m):
        if np.linalg.norm(residual) < OMP_RESIDUAL_TOL:
            break
        corr = np.full(n, -np.inf)
        corr[usable] = np.abs(D[:, usable].T @ residual) / norms[usable]
        corr[active] = -np.inf
        k = int(np.argmax(corr))
        if not np.isfinite(corr[k]) or corr[k] <= floor:
            break
        active.append(k)
        coef, *_ = np.linalg.lstsq(D[:, active], v, rcond=None)
        residual = v - D[:, active] @ coef

    alpha = np.zeros(n)
    alpha[active] = coef
    return _solution(D, v, g, np.ones(n), default_lambda(D) or 1.0, alpha, "omp")


# ---------- selection ----------


def select_frames(solution: ActivationSolution, m: int) -> np.ndarray:
    """The m local indices with the largest |alpha| (lower index wins ties), ascending."""
    alpha = np.abs(np.asarray(solution.alpha))
    m = max(0, min(int(m), alpha.size))
    order = np.lexsort((np.arange(alpha.size), -alpha))
    return np.sort(order[:m])
