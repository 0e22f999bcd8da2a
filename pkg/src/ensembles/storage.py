"""
Instance storage - NumPy .npz container

Layout (all arrays little-endian float64, matrices row-major):
- matrices: (n, d, d)
- b: (n,)
- truth: (d,) real working coordinates
- metadata: JSON string {"format_version", "spec", "domain", "p"}
"""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from ..utils.errors import InstanceFormatError
from .generator import Domain, EnsembleSpec, MeasurementSet, Signal

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_instance(measurements: MeasurementSet, path: Union[str, Path]) -> Path:
    """Write an instance to `path` as a compressed .npz archive (the name is used as given)"""
    path = Path(path)
    metadata = {
        "format_version": FORMAT_VERSION,
        "spec": json.loads(measurements.spec.model_dump_json()),
        "domain": measurements.truth.domain.value,
        "p": measurements.truth.p,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as handle:
            np.savez_compressed(
                handle,
                matrices=measurements.matrices.astype("<f8"),
                b=measurements.b.astype("<f8"),
                truth=measurements.truth.values.astype("<f8"),
                metadata=np.array(json.dumps(metadata, sort_keys=True)),
            )
    except OSError as e:
        raise InstanceFormatError(f"Cannot write instance to {path}: {e}") from e

    logger.info(f"Instance saved: {path}")
    return path


def load_instance(path: Union[str, Path]) -> MeasurementSet:
    """Read an instance written by save_instance"""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            metadata = json.loads(archive["metadata"].item())
            matrices = np.array(archive["matrices"], dtype=np.float64)
            b = np.array(archive["b"], dtype=np.float64)
            truth_values = np.array(archive["truth"], dtype=np.float64)
    except (OSError, KeyError, ValueError) as e:
        raise InstanceFormatError(f"Cannot read instance {path}: {e}") from e

    version = metadata.get("format_version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"Unsupported instance format version {version!r} in {path}")

    try:
        spec = EnsembleSpec.model_validate(metadata["spec"])
        truth = Signal(values=truth_values, domain=Domain(metadata["domain"]), p=int(metadata["p"]))
    except (KeyError, ValueError, ValidationError) as e:
        raise InstanceFormatError(f"Invalid instance metadata in {path}: {e}") from e

    return MeasurementSet(matrices=matrices, b=b, truth=truth, spec=spec)
