#!/usr/bin/env python3
"""
Wirtinger-Flow Baseline - spectral initialization plus gradient descent

The baseline starts from the leading eigenvector of Y = (1/n) sum_i b_i A_i,
scaled by sqrt(lambda_1 / sigma_hat^2) where sigma_hat^2 is the mean square
of the diagonal entries of the A_i, and then runs fixed-step gradient
descent on the same least-squares objective as GRNM with

    eta = (alpha / sigma) / max(||x0||^2, 1e-12).

Whenever a step would increase f, eta is halved (persistently) and the step
retried, up to 30 times per iteration. In real embedded coordinates plain
gradient descent matches the Wirtinger update, so no complex calculus is
needed.
"""

import logging
import time
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..ensembles.generator import MeasurementSet
from ..utils.errors import InvalidConfigError, InvalidInputError
from .grnm import IterateRecord, Phase, SolveResult, SolveStatus
from .linalg import leading_eigenpair
from .objective import QuadraticResidualModel

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30


class WfConfig(BaseModel):
    """Wirtinger-flow baseline parameters"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.2, gt=0)
    max_iters: int = Field(default=5000, ge=1)
    eps: float = Field(default=1e-5, gt=0)
    power_iters: int = Field(default=200, ge=1)
    power_tol: float = Field(default=1e-8, gt=0)

    @classmethod
    def build(cls, **overrides) -> "WfConfig":
        try:
            return cls(**{k: v for k, v in overrides.items() if v is not None})
        except ValidationError as e:
            raise InvalidConfigError(f"Invalid WF configuration: {e}") from e


def spectral_matrix(measurements: MeasurementSet) -> np.ndarray:
    """Y = (1/n) sum_i b_i A_i"""
    n, d = measurements.n, measurements.d
    Y = (measurements.b @ measurements.matrices.reshape(n, d * d)).reshape(d, d) / n
    return 0.5 * (Y + Y.T)


def diagonal_variance(measurements: MeasurementSet) -> float:
    """Mean square of the diagonal entries across all A_i"""
    diagonals = np.diagonal(measurements.matrices, axis1=1, axis2=2)
    return float(np.mean(diagonals * diagonals))


def _spectral_estimate(measurements: MeasurementSet,
                       config: WfConfig) -> Tuple[np.ndarray, List[str]]:
    if measurements.n < 1:
        raise InvalidInputError("Spectral initialization needs at least one measurement")

    notes: List[str] = []
    eig = leading_eigenpair(spectral_matrix(measurements), tol=config.power_tol,
                            max_iter=config.power_iters)
    if not eig.converged:
        notes.append(f"spectral power iteration not converged after {eig.iterations} steps")
        logger.warning(notes[-1])

    v = eig.vector / np.linalg.norm(eig.vector)
    if eig.value <= 0:
        notes.append(f"leading eigenvalue {eig.value:.3e} <= 0; unit-norm spectral start")
        logger.warning(notes[-1])
        return v, notes

    sigma_sq = diagonal_variance(measurements)
    if sigma_sq <= 0:
        notes.append("zero diagonal variance; unit-norm spectral start")
        logger.warning(notes[-1])
        return v, notes
    return v * np.sqrt(eig.value / sigma_sq), notes


def spectral_init(measurements: MeasurementSet, config: Optional[WfConfig] = None) -> np.ndarray:
    """Leading-eigenvector start scaled to the estimated signal energy"""
    x0, _ = _spectral_estimate(measurements, config or WfConfig())
    return x0


def wf_solve(model: QuadraticResidualModel, config: Optional[WfConfig] = None,
             x0: Optional[np.ndarray] = None) -> SolveResult:
    """Gradient descent from the spectral start

    Args:
        model: objective of the instance
        config: baseline parameters
        x0: override the spectral start (used by tests)

    Returns:
        SolveResult; all iterations are reported as phase One with tau = eta
    """
    config = config or WfConfig()
    start = time.perf_counter()
    notes: List[str] = []
    if x0 is None:
        x0, notes = _spectral_estimate(model.measurements, config)
    x = np.array(x0, dtype=np.float64)

    sigma = model.measurements.spec.sigma
    eta = (config.alpha / sigma) / max(float(x @ x), 1e-12)

    trace: List[IterateRecord] = []
    status = SolveStatus.MAX_ITERS
    for k in range(config.max_iters + 1):
        f_x, g = model.value_and_gradient(x)
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            status = SolveStatus.EXACT_STATIONARY
            break
        if g_norm < config.eps:
            status = SolveStatus.GRAD_TOLERANCE_MET
            break
        if k == config.max_iters:
            break

        for halvings in range(MAX_HALVINGS + 1):
            x_new = x - eta * g
            if model.value(x_new) <= f_x:
                break
            eta *= 0.5
        else:
            logger.warning(f"WF step safeguard exhausted at k={k}, ||g||={g_norm:.3e}")
            status = SolveStatus.BACKTRACK_FAILURE
            break

        trace.append(IterateRecord(k=k, phase=Phase.ONE, f=f_x, grad_norm=g_norm,
                                   j_k=halvings, tau=eta))
        x = x_new

    f_final, g_final = model.value_and_gradient(x)
    return SolveResult(
        x_hat=x,
        status=status,
        trace=trace,
        phase1_iters=len(trace),
        phase2_iters=0,
        wall_time=time.perf_counter() - start,
        final_value=f_final,
        final_grad_norm=float(np.linalg.norm(g_final)),
        notes=notes,
    )
