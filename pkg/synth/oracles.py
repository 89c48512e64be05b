# synth/oracles.py
"""
Reference computations used to check the samplers, written independently of
sampling.solvers.
"""
from __future__ import annotations

import itertools
import math
from typing import Tuple

import numpy as np

from footage.exceptions import DimensionMismatch, TooLarge

MAX_SUBSETS = 500_000


def _story_terms(D, w) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    D = np.asarray(D, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if D.ndim != 2 or w.shape != (D.shape[1],):
        raise DimensionMismatch(f"dictionary {D.shape} and weights {w.shape} do not agree")
    v = np.zeros(D.shape[0])
    for column in D.T:
        v += column
    g = np.sqrt(((D - v[:, None]) ** 2).sum(axis=0))
    return D, w, v, g


def llc_objective(D, w, lam: float, alpha) -> float:
    D, w, v, g = _story_terms(D, w)
    alpha = np.asarray(alpha, dtype=np.float64)
    return float(np.sum((v - D @ alpha) ** 2) + lam * np.sum((w * g * alpha) ** 2))


def oracle_llc_gradient(D, w, lam: float, alpha) -> np.ndarray:
    """2 D^T (D a - v) + 2 lam diag((w g)^2) a."""
    D, w, v, g = _story_terms(D, w)
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != w.shape:
        raise DimensionMismatch(f"alpha {alpha.shape} does not match {w.shape}")
    return 2.0 * D.T @ (D @ alpha - v) + 2.0 * lam * (w * g) ** 2 * alpha


def oracle_llc_descent(D, w, lam: float, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Plain gradient descent with step 1/L, run until ||grad|| < tol."""
    D, w, v, g = _story_terms(D, w)
    gram = D.T @ D
    target = D.T @ v
    penalty = lam * (w * g) ** 2
    lipschitz = 2.0 * (np.linalg.eigvalsh(gram).max() + penalty.max())
    alpha = np.zeros(D.shape[1])
    for _ in range(max_iter):
        grad = 2.0 * (gram @ alpha - target) + 2.0 * penalty * alpha
        if np.linalg.norm(grad) < tol:
            break
        alpha -= grad / lipschitz
    return alpha


def oracle_best_subset(D, m: int) -> Tuple[Tuple[int, ...], float]:
    """Exhaustive best m-column least-squares reconstruction of the story."""
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[1]
    if not 1 <= m <= n:
        raise DimensionMismatch(f"subset size {m} outside [1, {n}]")
    if math.comb(n, m) > MAX_SUBSETS:
        raise TooLarge(f"C({n}, {m}) = {math.comb(n, m)} subsets exceeds {MAX_SUBSETS}")
    v = D.sum(axis=1)
    best: Tuple[Tuple[int, ...], float] = ((), math.inf)
    for subset in itertools.combinations(range(n), m):
        columns = D[:, subset]
        coef, *_ = np.linalg.lstsq(columns, v, rcond=None)
        residual = float(np.linalg.norm(v - columns @ coef))
        if residual < best[1]:
            best = (subset, residual)
    return best
