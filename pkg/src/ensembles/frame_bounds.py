"""
Empirical frame bounds of a measurement set.

For unit vectors u, v the quantity (1/n) sum_i <u, A_i v>^2 lies between the
frame constants lambda_lower and lambda_upper. Sampling only visits finitely
many pairs, so the returned `lower` is an upper bound on lambda_lower and
`upper` a lower bound on lambda_upper.

Pairs are drawn as u uniform on the sphere and v = cos(phi) u + sin(phi) w,
with w a uniform unit direction orthogonal to u and phi uniform on
[0, pi/2]. Both u and v are marginally uniform and the overlap <u, v>^2
covers [0, 1], which is where the extremes of the quadratic form sit.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.errors import InvalidInputError
from ..utils.seeding import StreamRole, make_rng
from .generator import MeasurementSet

logger = logging.getLogger(__name__)

# keeps the (chunk, n, d) intermediate around 4M floats
CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class FrameBounds:
    """Sampled estimates of the frame constants"""
    lower: float
    upper: float
    samples: int
    gamma_margin: float


def sample_sphere_pairs(d: int, samples: int, rng: np.random.Generator):
    """Unit vectors (U, V), each of shape (samples, d)"""
    U = rng.standard_normal((samples, d))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    if d == 1:
        return U, U.copy()

    W = rng.standard_normal((samples, d))
    W -= np.sum(W * U, axis=1, keepdims=True) * U
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    phi = rng.uniform(0.0, 0.5 * np.pi, size=(samples, 1))
    V = np.cos(phi) * U + np.sin(phi) * W
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return U, V


def frame_values(measurements: MeasurementSet, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """(1/n) sum_i <u_s, A_i v_s>^2 for each sampled pair s"""
    n, d = measurements.n, measurements.d
    flat = measurements.matrices.reshape(n * d, d)
    chunk = max(1, CHUNK_ENTRIES // (n * d))

    values = np.empty(U.shape[0])
    for start in range(0, U.shape[0], chunk):
        stop = min(start + chunk, U.shape[0])
        AV = (V[start:stop] @ flat.T).reshape(stop - start, n, d)
        forms = np.einsum("snd,sd->sn", AV, U[start:stop])
        values[start:stop] = np.mean(forms * forms, axis=1)
    return values


def estimate_frame_bounds(
    measurements: MeasurementSet,
    samples: int = 10_000,
    rng: Optional[np.random.Generator] = None,
) -> FrameBounds:
    """Monte-Carlo estimate of the frame constants

    Args:
        measurements: instance to bound
        samples: number of sampled (u, v) pairs
        rng: sampling stream; derived from the instance seed when omitted

    Returns:
        FrameBounds with lower = min and upper = max over the sampled pairs
    """
    if samples < 1:
        raise InvalidInputError(f"Frame-bound sample count must be >= 1, got {samples}")

    rng = rng if rng is not None else make_rng(measurements.spec.seed, StreamRole.FRAME)
    U, V = sample_sphere_pairs(measurements.d, samples, rng)
    values = frame_values(measurements, U, V)

    lower, upper = float(values.min()), float(values.max())
    if lower <= 0:
        logger.warning(f"Sampled lower frame bound is not positive ({lower:.3e})")
    # gamma with lower = (1 - gamma) * upper / 2, the slack relative to an ideal ratio of 2
    gamma_margin = 1.0 - 2.0 * lower / upper if upper > 0 else 1.0
    logger.debug(f"Frame bounds from {samples} pairs: [{lower:.4f}, {upper:.4f}]")
    return FrameBounds(lower=lower, upper=upper, samples=samples, gamma_margin=gamma_margin)
