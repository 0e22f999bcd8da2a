"""Dense symmetric eigen helpers shared by the objective and the baseline."""

from dataclasses import dataclass
from typing import Optional

import numpy as np


START_SEED = 20240917


@dataclass
class PowerIterationResult:
    """Outcome of a power iteration"""
    value: float
    vector: np.ndarray
    converged: bool
    iterations: int


def spectral_norm(S: np.ndarray, tol: float = 1e-8, max_iter: Optional[int] = None,
                  start: Optional[np.ndarray] = None) -> PowerIterationResult:
    """Spectral norm of a symmetric matrix by power iteration

    Iterates v <- S v / ||S v|| and reports ||S v||; stops when the estimate
    changes by less than `tol` relative.

    Args:
        S: symmetric d x d matrix
        tol: relative tolerance on successive estimates
        max_iter: iteration cap, 10 * d when omitted
        start: start vector, a fixed pseudo-random direction when omitted

    Returns:
        PowerIterationResult with value = ||S|| estimate
    """
    d = S.shape[0]
    max_iter = max_iter if max_iter is not None else 10 * d
    v = _default_start(d) if start is None else np.array(start, dtype=np.float64)
    v /= np.linalg.norm(v)

    estimate = 0.0
    for it in range(1, max_iter + 1):
        w = S @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return PowerIterationResult(value=0.0, vector=v, converged=True, iterations=it)
        v = w / norm
        if abs(norm - estimate) <= tol * norm:
            return PowerIterationResult(value=norm, vector=v, converged=True, iterations=it)
        estimate = norm

    return PowerIterationResult(value=estimate, vector=v, converged=False, iterations=max_iter)


def leading_eigenpair(Y: np.ndarray, tol: float = 1e-8, max_iter: int = 200,
                      start: Optional[np.ndarray] = None) -> PowerIterationResult:
    """Algebraically largest eigenpair of a symmetric matrix

    Power iteration on Y + cI with c the largest absolute row sum of Y, which
    bounds the spectral radius, so the shifted spectrum is nonnegative and the
    dominant eigenvector is the one of the largest eigenvalue of Y. The
    eigenvalue is the Rayleigh quotient of Y; convergence is declared when
    ||Y v - lambda v|| <= tol * max(|lambda|, 1e-300) or the residual is zero.
    """
    d = Y.shape[0]
    shift = float(np.max(np.sum(np.abs(Y), axis=1))) if d else 0.0
    v = _default_start(d) if start is None else np.array(start, dtype=np.float64)
    v /= np.linalg.norm(v)

    lam = float(v @ Y @ v)
    for it in range(1, max_iter + 1):
        w = Y @ v + shift * v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return PowerIterationResult(value=0.0, vector=v, converged=True, iterations=it)
        v = w / norm
        Yv = Y @ v
        lam = float(v @ Yv)
        residual = float(np.linalg.norm(Yv - lam * v))
        if residual <= tol * max(abs(lam), 1e-300) or residual == 0.0:
            return PowerIterationResult(value=lam, vector=v, converged=True, iterations=it)

    return PowerIterationResult(value=lam, vector=v, converged=False, iterations=max_iter)


def _default_start(d: int) -> np.ndarray:
    # fixed seed: results depend only on the matrix
    return np.random.default_rng(START_SEED).standard_normal(d)
