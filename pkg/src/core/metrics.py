"""
Recovery metrics: phase-invariant relative error, success classification and
aggregate statistics over trials.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..ensembles.generator import Domain, Signal
from ..utils.errors import InvalidDimensionError, InvalidInputError

NOISELESS_THRESHOLD = 1e-5
NOISY_THRESHOLD = 5e-3


@dataclass
class TrialOutcome:
    """Metrics of one solver run"""
    rel_err: float
    success: bool
    wall_time: float
    iters: Tuple[int, int]
    final_grad_norm: float
    certificate_passed: Optional[bool] = None


@dataclass
class AggregateSummary:
    """Aggregates over a list of outcomes"""
    trials: int
    success_rate: float
    mean_rel_err: float
    median_rel_err: float
    mean_time: float
    mean_iters: float


def relative_error(x_hat: Union[Signal, np.ndarray], x_star: Signal) -> float:
    """min over global phase of ||x* - x_hat e^{j theta}|| / ||x*||

    Real signals minimise over the sign. Complex signals (embedded
    coordinates) use the optimal phase e^{j theta} = <x_hat, x*>/|<x_hat, x*>|.
    """
    values = x_hat.values if isinstance(x_hat, Signal) else np.asarray(x_hat, dtype=np.float64)
    if isinstance(x_hat, Signal) and x_hat.domain is not x_star.domain:
        raise InvalidInputError("Signals live in different domains")
    if values.shape != x_star.values.shape:
        raise InvalidDimensionError(f"Estimate shape {values.shape} does not match {x_star.values.shape}")

    star_norm = float(np.linalg.norm(x_star.values))
    if star_norm == 0.0:
        raise InvalidInputError("Relative error is undefined for a zero true signal")

    if x_star.domain is Domain.REAL:
        return min(float(np.linalg.norm(x_star.values - values)),
                   float(np.linalg.norm(x_star.values + values))) / star_norm

    z_star = x_star.as_complex()
    z_hat = x_star.with_values(values).as_complex()
    overlap = np.vdot(z_hat, z_star)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(z_star - z_hat * phase)) / star_norm


def classify_success(rel_err: float, noisy: bool) -> bool:
    """rel_err < 1e-5 (noiseless) or < 5e-3 (noisy)"""
    threshold = NOISY_THRESHOLD if noisy else NOISELESS_THRESHOLD
    return bool(rel_err < threshold)


def aggregate(outcomes: Sequence[TrialOutcome]) -> AggregateSummary:
    """Success rate, mean/median relative error, mean time and iterations

    Raises:
        InvalidInputError: on an empty list
    """
    if not outcomes:
        raise InvalidInputError("Cannot aggregate an empty list of outcomes")

    rel_errs = np.array([o.rel_err for o in outcomes], dtype=np.float64)
    return AggregateSummary(
        trials=len(outcomes),
        success_rate=sum(1 for o in outcomes if o.success) / len(outcomes),
        mean_rel_err=float(np.mean(rel_errs)),
        median_rel_err=float(np.median(rel_errs)),
        mean_time=float(np.mean([o.wall_time for o in outcomes])),
        mean_iters=float(np.mean([sum(o.iters) for o in outcomes])),
    )
