#!/usr/bin/env python3
"""
Gradient Regularized Newton Method - two-phase solver for the QMR objective

Phase I runs Armijo gradient descent from x0 until ||g|| < eps1. Phase II
takes regularized Newton directions

    d = -(H + beta ||g||^delta I)^{-1} g,     H = Gauss-Newton matrix,

with Armijo backtracking until ||g|| < eps or the total iteration budget is
spent. The damping vanishes with the gradient, which gives the 1 + delta
local rate. A local-minimum certificate checks

    ||(1/n) sum_i phi_i(x) A_i|| < 2 lambda_lower ||x||^2

at the returned point.

Key Features:
- Armijo backtracking with the smallest admissible exponent in both phases
- Cholesky solve of the damped system with one jitter retry
- Per-iteration trace (f, ||g||, j_k, tau_k, ||d||) and timing
- Exact-stationarity and backtracking-failure statuses
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..ensembles.generator import Domain, MeasurementSet
from ..utils.errors import FactorizationError, HarnessIOError, InvalidConfigError, InvalidInputError
from .objective import QuadraticResidualModel

logger = logging.getLogger(__name__)


class InitMode(Enum):
    """Initial point choice"""
    SCALED_RANDOM = "scaled_random"
    GIVEN = "given"


class Phase(Enum):
    """Solver phase a trace record belongs to"""
    ONE = 1
    TWO = 2


class SolveStatus(Enum):
    """Termination reason"""
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    EXACT_STATIONARY = "ExactStationary"
    MAX_ITERS = "MaxIters"
    BACKTRACK_FAILURE = "BacktrackFailure"


class GrnmConfig(BaseModel):
    """GRNM parameters

    mu2 < 1/2 is needed for the superlinear-rate statement; it is not enforced.
    complex_eps replaces eps on noiseless complex instances when smaller (None
    disables it); see for_instance.
    """
    model_config = ConfigDict(frozen=True)

    eps1: float = Field(default=0.1, gt=0)
    eps: float = Field(default=1e-5, gt=0)
    beta: float = Field(default=0.5, gt=0)
    delta: float = Field(default=0.25, gt=0, lt=1)
    mu1: float = Field(default=0.1, gt=0, lt=1)
    mu2: float = Field(default=0.1, gt=0, lt=1)
    alpha1: float = Field(default=0.5, gt=0, lt=1)
    alpha2: float = Field(default=0.5, gt=0, lt=1)
    max_iters: int = Field(default=5000, ge=1)
    max_backtracks: int = Field(default=60, ge=0)
    init_mode: InitMode = InitMode.SCALED_RANDOM
    complex_eps: Optional[float] = Field(default=1e-10, gt=0)

    @model_validator(mode="after")
    def _check_tolerances(self):
        if not self.eps < self.eps1:
            raise ValueError(f"eps ({self.eps}) must be smaller than eps1 ({self.eps1})")
        if self.complex_eps is not None and not self.complex_eps < self.eps1:
            raise ValueError(f"complex_eps ({self.complex_eps}) must be smaller than eps1 ({self.eps1})")
        return self

    @classmethod
    def build(cls, **overrides) -> "GrnmConfig":
        """Validated config, raising InvalidConfigError instead of ValidationError"""
        try:
            return cls(**{k: v for k, v in overrides.items() if v is not None})
        except ValidationError as e:
            raise InvalidConfigError(f"Invalid GRNM configuration: {e}") from e

    def for_instance(self, measurements: MeasurementSet) -> "GrnmConfig":
        """Config solve() uses on `measurements`

        Noiseless complex instances stop Phase II at min(eps, complex_eps). With
        unit-norm signals the damping is still comparable to the smallest nonzero
        Gauss-Newton eigenvalue at ||g|| = 1e-5.
        """
        if (self.complex_eps is None or self.complex_eps >= self.eps
                or measurements.spec.kind.domain is Domain.REAL or measurements.noisy):
            return self
        return self.model_copy(update={"eps": self.complex_eps})


@dataclass
class IterateRecord:
    """State at x^k and the step taken from it"""
    k: int
    phase: Phase
    f: float
    grad_norm: float
    j_k: int
    tau: float
    dir_norm: float = float("nan")


@dataclass
class CertificateReport:
    """Local-minimum certificate at a returned point"""
    s_norm: float
    threshold: float
    lambda_lower_est: float
    passed: bool
    degenerate: bool = False
    converged: bool = True


@dataclass
class SolveResult:
    """Solver output shared by GRNM and the Wirtinger-flow baseline"""
    x_hat: np.ndarray
    status: SolveStatus
    trace: List[IterateRecord] = field(default_factory=list)
    phase1_iters: int = 0
    phase2_iters: int = 0
    wall_time: float = 0.0
    final_value: float = float("nan")
    final_grad_norm: float = float("nan")
    certificate: Optional[CertificateReport] = None
    notes: List[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.phase1_iters + self.phase2_iters


def default_initial_point(model: QuadraticResidualModel, rng: np.random.Generator) -> np.ndarray:
    """z / f(0) with z standard normal; unit-norm z when f(0) < 1e-12"""
    z = rng.standard_normal(model.d)
    f0 = model.value(np.zeros(model.d))
    if f0 < 1e-12:
        return z / np.linalg.norm(z)
    return z / f0


def _armijo_exponent(model, x, f_x, step, slope, mu, alpha, max_backtracks):
    """Smallest j in [0, max_backtracks] with f(x + alpha^j step) <= f_x + mu alpha^j slope

    Returns:
        (j, tau, x_new, f_new), or None when no exponent qualifies
    """
    for j in range(max_backtracks + 1):
        tau = alpha**j
        x_new = x + tau * step
        f_new = model.value(x_new)
        if f_new <= f_x + mu * tau * slope:
            return j, tau, x_new, f_new
    return None


def phase1(model: QuadraticResidualModel, x0: np.ndarray, config: GrnmConfig,
           start_k: int = 0) -> Tuple[np.ndarray, List[IterateRecord], Optional[SolveStatus]]:
    """Armijo gradient descent until ||g|| < eps1

    Returns:
        (x^K, records, status) where status is None when the tolerance was met
        and Phase II should follow
    """
    x = np.array(x0, dtype=np.float64)
    records: List[IterateRecord] = []
    k = start_k

    while True:
        f_x, g = model.value_and_gradient(x)
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            return x, records, SolveStatus.EXACT_STATIONARY
        if g_norm < config.eps1:
            return x, records, None
        if k >= config.max_iters:
            return x, records, SolveStatus.MAX_ITERS

        step = _armijo_exponent(model, x, f_x, -g, -g_norm**2, config.mu1,
                                config.alpha1, config.max_backtracks)
        if step is None:
            logger.warning(f"Phase I backtracking exhausted at k={k}, ||g||={g_norm:.3e}")
            return x, records, SolveStatus.BACKTRACK_FAILURE

        j, tau, x, _ = step
        records.append(IterateRecord(k=k, phase=Phase.ONE, f=f_x, grad_norm=g_norm, j_k=j, tau=tau))
        k += 1


def newton_direction(H: np.ndarray, g: np.ndarray, beta: float, delta: float) -> np.ndarray:
    """Solve (H + beta ||g||^delta I) d = -g by Cholesky

    A failed factorization is retried once with 1e-12 * trace jitter on the
    diagonal; one step of iterative refinement keeps the residual at the
    level of ||g|| * 1e-10.

    Raises:
        InvalidInputError: if g is zero
        FactorizationError: if the jittered matrix still fails
    """
    g = np.asarray(g, dtype=np.float64)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        raise InvalidInputError("Newton direction needs a nonzero gradient")

    damped = H + beta * g_norm**delta * np.eye(H.shape[0])
    try:
        factor = cho_factor(damped, lower=False, check_finite=False)
    except LinAlgError:
        jitter = 1e-12 * max(float(np.trace(damped)), 1.0)
        logger.warning(f"Cholesky failed; retrying with jitter {jitter:.1e}")
        try:
            factor = cho_factor(damped + jitter * np.eye(H.shape[0]), lower=False, check_finite=False)
        except LinAlgError as e:
            raise FactorizationError(f"Damped Newton matrix is not positive definite: {e}") from e

    d = cho_solve(factor, -g, check_finite=False)
    residual = damped @ d + g
    if np.linalg.norm(residual) > 1e-10 * g_norm:
        d -= cho_solve(factor, residual, check_finite=False)
    return d


def phase2(model: QuadraticResidualModel, xK: np.ndarray, config: GrnmConfig,
           start_k: int = 0) -> Tuple[np.ndarray, List[IterateRecord], SolveStatus]:
    """Regularized Newton iterations with Armijo backtracking"""
    x = np.array(xK, dtype=np.float64)
    records: List[IterateRecord] = []
    k = start_k

    while True:
        f_x, g = model.value_and_gradient(x)
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            return x, records, SolveStatus.EXACT_STATIONARY
        if g_norm < config.eps:
            return x, records, SolveStatus.GRAD_TOLERANCE_MET
        if k >= config.max_iters:
            return x, records, SolveStatus.MAX_ITERS

        H = model.gauss_newton_matrix(x)
        d = newton_direction(H, g, config.beta, config.delta)
        step = _armijo_exponent(model, x, f_x, d, float(g @ d), config.mu2,
                                config.alpha2, config.max_backtracks)
        if step is None:
            logger.warning(f"Phase II backtracking exhausted at k={k}, ||g||={g_norm:.3e}")
            return x, records, SolveStatus.BACKTRACK_FAILURE

        j, tau, x, _ = step
        records.append(IterateRecord(k=k, phase=Phase.TWO, f=f_x, grad_norm=g_norm, j_k=j,
                                     tau=tau, dir_norm=float(np.linalg.norm(d))))
        k += 1


def certify_local_min(model: QuadraticResidualModel, x_hat: np.ndarray,
                      frame_lower: float) -> CertificateReport:
    """Check ||(1/n) sum_i phi_i A_i|| < 2 frame_lower ||x_hat||^2

    Args:
        model: objective of the instance
        x_hat: point to certify
        frame_lower: positive lower frame bound (sampled or population value)
    """
    if frame_lower <= 0:
        raise InvalidInputError(f"frame_lower must be positive, got {frame_lower}")

    x_hat = np.asarray(x_hat, dtype=np.float64)
    norm_sq = float(x_hat @ x_hat)
    spectrum = model.residual_matrix_spectrum(x_hat)
    if norm_sq == 0.0:
        return CertificateReport(s_norm=spectrum.value, threshold=0.0, lambda_lower_est=frame_lower,
                                 passed=False, degenerate=True, converged=spectrum.converged)

    threshold = 2.0 * frame_lower * norm_sq
    return CertificateReport(s_norm=spectrum.value, threshold=threshold, lambda_lower_est=frame_lower,
                             passed=spectrum.value < threshold, converged=spectrum.converged)


def solve(model: QuadraticResidualModel, config: Optional[GrnmConfig] = None,
          rng: Optional[np.random.Generator] = None, x0: Optional[np.ndarray] = None,
          frame_lower: Optional[float] = None) -> SolveResult:
    """Run Phase I and Phase II

    Args:
        model: objective
        config: parameters (defaults when omitted)
        rng: stream for the scaled random initial point
        x0: explicit starting point (used when given or init_mode is GIVEN)
        frame_lower: attach a certificate using this lower frame bound

    Returns:
        SolveResult with trace, status and timings
    """
    config = (config or GrnmConfig()).for_instance(model.measurements)
    start = time.perf_counter()

    if x0 is None:
        if config.init_mode is InitMode.GIVEN:
            raise InvalidInputError("init_mode=GIVEN requires x0")
        if rng is None:
            raise InvalidInputError("A random generator is required for the scaled random start")
        x0 = default_initial_point(model, rng)

    x, trace, status = phase1(model, x0, config)
    phase1_iters = len(trace)
    phase2_iters = 0

    if status is None:
        x, records, status = phase2(model, x, config, start_k=phase1_iters)
        trace.extend(records)
        phase2_iters = len(records)

    f_final, g_final = model.value_and_gradient(x)
    result = SolveResult(
        x_hat=x,
        status=status,
        trace=trace,
        phase1_iters=phase1_iters,
        phase2_iters=phase2_iters,
        final_value=f_final,
        final_grad_norm=float(np.linalg.norm(g_final)),
    )
    if frame_lower is not None:
        result.certificate = certify_local_min(model, x, frame_lower)
    result.wall_time = time.perf_counter() - start

    logger.debug(
        f"GRNM finished: {status.value} after {phase1_iters}+{phase2_iters} iterations, "
        f"f={f_final:.3e}, ||g||={result.final_grad_norm:.3e}"
    )
    return result


TRACE_COLUMNS = ["k", "phase", "f", "grad_norm", "j_k", "tau", "dir_norm"]


def write_trace_csv(result: SolveResult, path: Union[str, Path]) -> Path:
    """Write the per-iteration trace as CSV"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(TRACE_COLUMNS)
            for record in result.trace:
                writer.writerow([record.k, record.phase.value, repr(record.f), repr(record.grad_norm),
                                 record.j_k, repr(record.tau), repr(record.dir_norm)])
    except OSError as e:
        raise HarnessIOError(f"Cannot write trace to {path}: {e}") from e
    return path
