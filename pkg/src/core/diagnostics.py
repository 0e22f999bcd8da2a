"""
Finite-difference validation of the analytic gradient and Hessian.

Central differences with step h = 1e-5 (1 + ||x||) are compared against the
model's gradient (from f) and Hessian (from the gradient); errors are
measured as ||analytic - numeric|| / max(||numeric||, tiny).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .objective import QuadraticResidualModel

logger = logging.getLogger(__name__)

GRADIENT_TOL = 1e-6
HESSIAN_TOL = 1e-5


@dataclass
class FiniteDifferenceReport:
    """Worst relative errors over the checked points"""
    points: int
    max_gradient_error: float
    max_hessian_error: float
    gradient_errors: List[float] = field(default_factory=list)
    hessian_errors: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_gradient_error <= GRADIENT_TOL and self.max_hessian_error <= HESSIAN_TOL


def _relative(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(numeric)), float(np.linalg.norm(analytic)), 1e-300)
    return float(np.linalg.norm(analytic - numeric)) / scale


def numeric_gradient(model: QuadraticResidualModel, x: np.ndarray) -> np.ndarray:
    h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
    grad = np.empty(model.d)
    for i in range(model.d):
        e = np.zeros(model.d)
        e[i] = h
        grad[i] = (model.value(x + e) - model.value(x - e)) / (2.0 * h)
    return grad


def numeric_hessian(model: QuadraticResidualModel, x: np.ndarray) -> np.ndarray:
    h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
    hess = np.empty((model.d, model.d))
    for i in range(model.d):
        e = np.zeros(model.d)
        e[i] = h
        hess[:, i] = (model.gradient(x + e) - model.gradient(x - e)) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def finite_difference_check(model: QuadraticResidualModel, points: int = 5,
                            rng: Optional[np.random.Generator] = None,
                            scale: float = 1.0) -> FiniteDifferenceReport:
    """Compare analytic derivatives with central differences at random points"""
    rng = rng if rng is not None else np.random.default_rng(0)
    report = FiniteDifferenceReport(points=points, max_gradient_error=0.0, max_hessian_error=0.0)

    for _ in range(points):
        x = scale * rng.standard_normal(model.d)
        report.gradient_errors.append(_relative(model.gradient(x), numeric_gradient(model, x)))
        report.hessian_errors.append(_relative(model.hessian(x), numeric_hessian(model, x)))

    report.max_gradient_error = max(report.gradient_errors, default=0.0)
    report.max_hessian_error = max(report.hessian_errors, default=0.0)
    logger.info(
        f"Finite-difference check on {points} points: gradient {report.max_gradient_error:.2e}, "
        f"Hessian {report.max_hessian_error:.2e}"
    )
    return report
