#!/usr/bin/env python3
"""
Measurement Ensembles - synthetic quadratic measurements regression instances

This module generates ground-truth signals, symmetric measurement matrices
and observations b_i = <x*, A_i x*> (+ Gaussian noise) for three ensembles:

- real Gaussian symmetric: A_i = (B_i + B_i^T)/2, B_i entries N(0, sigma^2)
- complex Gaussian Hermitian: A_i = (R_i + R_i^T + j(I_i - I_i^T))/2
- complex rotation-invariant sub-Gaussian: A_i = sigma (B_i + B_i^H)/2 with
  entries r e^{j theta}, theta uniform on [0, 2 pi), r uniform on [0, sqrt(3)]

Complex instances are embedded into real symmetric 2p x 2p matrices at
generation time, so every solver works on real coordinates. Matrices are
stored densely as one read-only (n, d, d) float64 array.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.errors import InvalidDimensionError, InvalidInputError
from ..utils.seeding import StreamRole, make_rng
from ..utils.settings import DEFAULT_MAX_ENTRIES

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


class Domain(Enum):
    """Signal domain"""
    REAL = "real"
    COMPLEX = "complex"


class EnsembleKind(Enum):
    """Supported measurement ensembles"""
    REAL_GAUSSIAN = "real_gaussian"
    COMPLEX_GAUSSIAN = "complex_gaussian"
    COMPLEX_SUBGAUSSIAN = "complex_subgaussian"

    @property
    def domain(self) -> Domain:
        if self is EnsembleKind.REAL_GAUSSIAN:
            return Domain.REAL
        return Domain.COMPLEX


@dataclass(frozen=True, eq=False)
class Signal:
    """Signal in real working coordinates

    Complex signals store [Re(x); Im(x)], so len(values) is 2p.
    """
    values: np.ndarray
    domain: Domain
    p: int

    def __post_init__(self):
        expected = self.p if self.domain is Domain.REAL else 2 * self.p
        if self.values.shape != (expected,):
            raise InvalidDimensionError(
                f"{self.domain.value} signal with p={self.p} needs {expected} values, "
                f"got shape {self.values.shape}"
            )

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def as_complex(self) -> np.ndarray:
        """Native complex (or real) vector of length p"""
        if self.domain is Domain.REAL:
            return self.values.copy()
        return unembed_vector(self.values)

    def with_values(self, values: np.ndarray) -> "Signal":
        """Same domain and dimension, new coordinates"""
        return Signal(values=np.asarray(values, dtype=np.float64), domain=self.domain, p=self.p)


class EnsembleSpec(BaseModel):
    """Ensemble parameters for one instance"""
    model_config = ConfigDict(frozen=True)

    kind: EnsembleKind
    p: int = Field(ge=1)
    n: int = Field(ge=1)
    sigma: float = Field(default=1.0, gt=0)
    noise_sigma: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0, le=2**64 - 1)

    @property
    def d(self) -> int:
        """Working (real) dimension"""
        return self.p if self.kind.domain is Domain.REAL else 2 * self.p


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """One QMR instance: matrices (n, d, d), observations b, ground truth"""
    matrices: np.ndarray
    b: np.ndarray
    truth: Signal
    spec: EnsembleSpec

    def __post_init__(self):
        n, d = self.spec.n, self.spec.d
        if self.matrices.shape != (n, d, d):
            raise InvalidDimensionError(
                f"Expected matrices of shape {(n, d, d)}, got {self.matrices.shape}"
            )
        if self.b.shape != (n,):
            raise InvalidDimensionError(f"Expected b of length {n}, got shape {self.b.shape}")
        if self.truth.d != d:
            raise InvalidDimensionError(f"Truth has {self.truth.d} coordinates, expected {d}")
        if not np.array_equal(self.matrices, self.matrices.transpose(0, 2, 1)):
            raise InvalidInputError("Measurement matrices must be exactly symmetric")
        for array in (self.matrices, self.b, self.truth.values):
            array.setflags(write=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def noisy(self) -> bool:
        return self.spec.noise_sigma > 0


def generate_true_signal(p: int, domain: Domain, rng: np.random.Generator) -> Signal:
    """Draw a ground-truth signal

    Real signals have i.i.d. standard normal entries; complex signals have
    standard normal real and imaginary parts and are scaled to unit norm.

    Args:
        p: ambient dimension
        domain: Domain.REAL or Domain.COMPLEX
        rng: seeded generator

    Returns:
        Signal in real working coordinates
    """
    if p < 1:
        raise InvalidDimensionError(f"Signal dimension must be >= 1, got {p}")

    if domain is Domain.REAL:
        return Signal(values=rng.standard_normal(p), domain=domain, p=p)

    z = rng.standard_normal(p) + 1j * rng.standard_normal(p)
    z /= np.linalg.norm(z)
    return Signal(values=embed_vector(z), domain=domain, p=p)


def embed_vector(x: np.ndarray) -> np.ndarray:
    """[Re(x); Im(x)]"""
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag]).astype(np.float64)


def unembed_vector(u: np.ndarray) -> np.ndarray:
    """Inverse of embed_vector"""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.shape[0] % 2:
        raise InvalidDimensionError(f"Embedded vector must have even length, got {u.shape}")
    p = u.shape[0] // 2
    return u[:p] + 1j * u[p:]


def embed_hermitian(A: np.ndarray) -> np.ndarray:
    """Real symmetric [[Re A, -Im A], [Im A, Re A]] for one or a stack of matrices"""
    re, im = A.real, A.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2).astype(np.float64)


def embed_complex(A: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map a Hermitian form x^H A x onto a real quadratic form u^T M u

    Args:
        A: Hermitian p x p matrix
        x: complex vector of length p

    Returns:
        (M, u) with M real symmetric 2p x 2p and u = [Re x; Im x]

    Raises:
        InvalidInputError: if A is not Hermitian to 1e-12
        InvalidDimensionError: if shapes disagree
    """
    A = np.asarray(A, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidDimensionError(f"Expected a square matrix, got shape {A.shape}")
    if x.shape != (A.shape[0],):
        raise InvalidDimensionError(f"Vector of shape {x.shape} does not match matrix {A.shape}")
    scale = 1.0 + float(np.max(np.abs(A))) if A.size else 1.0
    if np.max(np.abs(A - A.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise InvalidInputError("Matrix is not Hermitian")
    return embed_hermitian(A), embed_vector(x)


def quadratic_forms(matrices: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(<x, A_i x>)_i for a stack of real matrices, fixed summation order"""
    n, d, _ = matrices.shape
    ax = np.matmul(matrices.reshape(n * d, d), x).reshape(n, d)
    return np.matmul(ax, x)


def _check_storage(n: int, d: int, max_entries: int) -> None:
    if n * d * d > max_entries:
        raise InvalidInputError(
            f"Instance needs n*d^2 = {n * d * d} entries, above the cap of {max_entries}"
        )


def _draw_matrices(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    n, p, sigma = spec.n, spec.p, spec.sigma

    if spec.kind is EnsembleKind.REAL_GAUSSIAN:
        B = rng.normal(0.0, sigma, size=(n, p, p))
        return (B + B.transpose(0, 2, 1)) * 0.5

    if spec.kind is EnsembleKind.COMPLEX_GAUSSIAN:
        R = rng.normal(0.0, sigma, size=(n, p, p))
        I = rng.normal(0.0, sigma, size=(n, p, p))
        re = (R + R.transpose(0, 2, 1)) * 0.5
        im = (I - I.transpose(0, 2, 1)) * 0.5
        return embed_hermitian(re + 1j * im)

    # rotation-invariant sub-Gaussian: bounded modulus, uniform phase, E r^2 = 1
    radius = rng.uniform(0.0, np.sqrt(3.0), size=(n, p, p))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(n, p, p))
    B = radius * np.exp(1j * theta)
    BH = B.conj().transpose(0, 2, 1)
    re = (sigma * 0.5) * (B.real + BH.real)
    im = (sigma * 0.5) * (B.imag + BH.imag)
    return embed_hermitian(re + 1j * im)


def generate_measurements(
    spec: EnsembleSpec,
    truth: Signal,
    rng: Optional[np.random.Generator] = None,
    noise_rng: Optional[np.random.Generator] = None,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> MeasurementSet:
    """Draw measurement matrices and observations for a given truth

    Args:
        spec: ensemble parameters
        truth: ground-truth signal (p and domain must match spec)
        rng: matrix stream; derived from spec.seed when omitted
        noise_rng: noise stream; derived from spec.seed when omitted
        max_entries: refuse instances with n*d^2 above this

    Returns:
        Immutable MeasurementSet
    """
    if truth.p != spec.p:
        raise InvalidDimensionError(f"Truth dimension {truth.p} does not match spec p={spec.p}")
    if truth.domain is not spec.kind.domain:
        raise InvalidInputError(
            f"{truth.domain.value} truth is incompatible with ensemble {spec.kind.value}"
        )
    _check_storage(spec.n, spec.d, max_entries)
    if spec.n < 2 * spec.p - 1:
        logger.warning(f"n={spec.n} is below 2p-1={2 * spec.p - 1}; recovery guarantees do not apply")

    rng = rng if rng is not None else make_rng(spec.seed, StreamRole.MATRICES)
    matrices = np.ascontiguousarray(_draw_matrices(spec, rng))

    b = quadratic_forms(matrices, truth.values)
    if spec.noise_sigma > 0:
        noise_rng = noise_rng if noise_rng is not None else make_rng(spec.seed, StreamRole.NOISE)
        b = b + noise_rng.normal(0.0, spec.noise_sigma, size=spec.n)

    return MeasurementSet(matrices=matrices, b=b, truth=truth, spec=spec)


def generate_instance(spec: EnsembleSpec, max_entries: int = DEFAULT_MAX_ENTRIES) -> MeasurementSet:
    """Signal and measurements from independent streams derived from spec.seed"""
    truth = generate_true_signal(spec.p, spec.kind.domain, make_rng(spec.seed, StreamRole.SIGNAL))
    return generate_measurements(spec, truth, max_entries=max_entries)
