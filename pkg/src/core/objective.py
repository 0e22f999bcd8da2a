#!/usr/bin/env python3
"""
Quadratic Residual Model - least-squares objective of a measurement set

For a MeasurementSet with symmetric A_1..A_n and observations b this module
evaluates

    phi_i(x) = <x, A_i x> - b_i
    f(x)     = (1/4n) ||phi(x)||^2
    grad f   = (1/n) sum_i phi_i(x) A_i x
    H(x)     = (2/n) A(x)^T A(x)              (Gauss-Newton matrix)
    hess f   = H(x) + (1/n) sum_i phi_i(x) A_i

where A(x) is the n x d matrix with rows (A_i x)^T. The stacked matrices
are viewed as one (n*d, d) block so A(x) is a single matrix-vector product;
the last evaluated point is cached so f, grad f and H at the same x share it.
"""

import logging
from typing import Optional

import numpy as np

from ..ensembles.generator import MeasurementSet
from ..utils.errors import InvalidDimensionError
from .linalg import PowerIterationResult, spectral_norm

logger = logging.getLogger(__name__)


class QuadraticResidualModel:
    """Evaluator for f, residuals, gradient, Gauss-Newton matrix and Hessian

    A model owns scratch buffers and is therefore single-threaded; create one
    model per thread over a shared MeasurementSet.
    """

    def __init__(self, measurements: MeasurementSet):
        self.measurements = measurements
        self.n = measurements.n
        self.d = measurements.d
        self._flat = measurements.matrices.reshape(self.n * self.d, self.d)

        # scratch
        self._ax_flat = np.empty(self.n * self.d)
        self._phi = np.empty(self.n)
        self._cached_x: Optional[np.ndarray] = None

    @property
    def b(self) -> np.ndarray:
        return self.measurements.b

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise InvalidDimensionError(f"Point has shape {x.shape}, model expects ({self.d},)")
        return x

    def _evaluate(self, x: np.ndarray):
        """Fill A(x) and phi(x) for x unless already cached"""
        x = self._check(x)
        if self._cached_x is None or not np.array_equal(self._cached_x, x):
            np.matmul(self._flat, x, out=self._ax_flat)
            np.matmul(self._ax_flat.reshape(self.n, self.d), x, out=self._phi)
            self._phi -= self.b
            self._cached_x = x.copy()
        return self._ax_flat.reshape(self.n, self.d), self._phi

    def measurement_operator(self, x: np.ndarray) -> np.ndarray:
        """A(x): n x d matrix with rows (A_i x)^T (copy)"""
        ax, _ = self._evaluate(x)
        return ax.copy()

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """phi_i(x) = <x, A_i x> - b_i"""
        _, phi = self._evaluate(x)
        return phi.copy()

    def value(self, x: np.ndarray) -> float:
        """f(x) = (1/4n) ||phi(x)||^2"""
        _, phi = self._evaluate(x)
        return float(phi @ phi) / (4.0 * self.n)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """(1/n) sum_i phi_i(x) A_i x"""
        ax, phi = self._evaluate(x)
        return (phi @ ax) / self.n

    def value_and_gradient(self, x: np.ndarray):
        ax, phi = self._evaluate(x)
        return float(phi @ phi) / (4.0 * self.n), (phi @ ax) / self.n

    def gauss_newton_matrix(self, x: np.ndarray) -> np.ndarray:
        """(2/n) A(x)^T A(x), symmetrized"""
        ax, _ = self._evaluate(x)
        H = (2.0 / self.n) * (ax.T @ ax)
        return 0.5 * (H + H.T)

    def residual_matrix(self, x: np.ndarray) -> np.ndarray:
        """S(x) = (1/n) sum_i phi_i(x) A_i"""
        _, phi = self._evaluate(x)
        S = (phi @ self._flat.reshape(self.n, self.d * self.d)).reshape(self.d, self.d) / self.n
        return 0.5 * (S + S.T)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """Gauss-Newton matrix plus the residual term"""
        H = self.gauss_newton_matrix(x) + self.residual_matrix(x)
        return 0.5 * (H + H.T)

    def residual_matrix_spectrum(self, x: np.ndarray, tol: float = 1e-8,
                                 max_iter: Optional[int] = None) -> PowerIterationResult:
        """Power-iteration estimate of ||S(x)|| with its convergence flag"""
        result = spectral_norm(self.residual_matrix(x), tol=tol, max_iter=max_iter)
        if not result.converged:
            logger.warning(
                f"Residual-matrix norm did not converge in {result.iterations} iterations; "
                f"estimate {result.value:.3e}"
            )
        return result

    def residual_matrix_norm(self, x: np.ndarray) -> float:
        """||(1/n) sum_i phi_i(x) A_i|| (spectral norm)"""
        return self.residual_matrix_spectrum(x).value
