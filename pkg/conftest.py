"""Shared pytest helpers for the qmr test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src.core.objective import QuadraticResidualModel  # noqa: E402
from src.ensembles.generator import (  # noqa: E402
    Domain,
    EnsembleKind,
    EnsembleSpec,
    MeasurementSet,
    Signal,
    generate_instance,
)


def hand_built_set(matrices, b=None, truth=None) -> MeasurementSet:
    """Real MeasurementSet from explicit matrices (b defaults to the noiseless forms of truth)"""
    matrices = np.array(matrices, dtype=np.float64)
    n, d, _ = matrices.shape
    truth = np.ones(d) if truth is None else np.array(truth, dtype=np.float64)
    if b is None:
        b = np.einsum("i,nij,j->n", truth, matrices, truth)
    spec = EnsembleSpec(kind=EnsembleKind.REAL_GAUSSIAN, p=d, n=n)
    return MeasurementSet(matrices=matrices, b=np.array(b, dtype=np.float64),
                          truth=Signal(values=truth, domain=Domain.REAL, p=d), spec=spec)


def scalar_model(a: float = 1.0, b: float = 0.0) -> QuadraticResidualModel:
    """d = n = 1 model with A = [a] and observation b"""
    return QuadraticResidualModel(hand_built_set([[[a]]], b=[b], truth=[1.0]))


@pytest.fixture
def real_instance():
    """Noiseless real Gaussian instance, p=10, n=60"""
    return generate_instance(EnsembleSpec(kind=EnsembleKind.REAL_GAUSSIAN, p=10, n=60, seed=11))


@pytest.fixture
def complex_instance():
    """Noiseless complex Gaussian instance, p=6, n=40"""
    return generate_instance(EnsembleSpec(kind=EnsembleKind.COMPLEX_GAUSSIAN, p=6, n=40, seed=12))
