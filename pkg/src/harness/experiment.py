"""
Experiment specification and trial records.

An ExperimentSpec is a grid over (ensemble kind, p, n or n/p, sigma, noise)
with a fixed number of trials per cell. Cells are enumerated in that nesting
order; the seed of trial t in cell c is derive_seed(master_seed, c, t).
"""

import json
from dataclasses import dataclass, fields
from enum import Enum
from itertools import product
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.grnm import GrnmConfig
from ..core.wf_baseline import WfConfig
from ..ensembles.generator import EnsembleKind, EnsembleSpec
from ..utils.errors import InvalidConfigError
from ..utils.seeding import derive_seed


class SolverName(Enum):
    """Solvers the harness can run"""
    GRNM = "GRNM"
    WF = "WF"


class ExperimentSpec(BaseModel):
    """Grid of experiment cells with seeding rules"""
    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    kinds: List[EnsembleKind] = Field(min_length=1)
    p_values: List[int] = Field(min_length=1)
    np_ratios: Optional[List[float]] = None
    n_values: Optional[List[int]] = None
    sigma_values: List[float] = Field(default=[1.0], min_length=1)
    noise_values: List[float] = Field(default=[0.0], min_length=1)
    solvers: List[SolverName] = Field(default=[SolverName.GRNM, SolverName.WF], min_length=1)
    trials_per_cell: int = Field(default=20, ge=1)
    master_seed: int = Field(default=0, ge=0, le=2**64 - 1)
    grnm: GrnmConfig = GrnmConfig()
    wf: WfConfig = WfConfig()
    certify: bool = False
    frame_samples: int = Field(default=10_000, ge=1)

    @model_validator(mode="after")
    def _check_grid(self):
        if (self.np_ratios is None) == (self.n_values is None):
            raise ValueError("Exactly one of np_ratios or n_values must be given")
        sizes = self.np_ratios if self.np_ratios is not None else self.n_values
        if not sizes:
            raise ValueError("Measurement-count grid is empty")
        if any(p < 1 for p in self.p_values) or any(s <= 0 for s in sizes):
            raise ValueError("p values and measurement counts must be positive")
        if any(s <= 0 for s in self.sigma_values) or any(e < 0 for e in self.noise_values):
            raise ValueError("sigma must be positive and noise nonnegative")
        return self

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        try:
            return cls.model_validate(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            raise InvalidConfigError(f"Invalid experiment config {path}: {e}") from e

    def with_overrides(self, **overrides) -> "ExperimentSpec":
        """Copy with non-None overrides applied and re-validated"""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return ExperimentSpec.model_validate(data)
        except ValidationError as e:
            raise InvalidConfigError(f"Invalid experiment overrides: {e}") from e

    def cells(self) -> List["Cell"]:
        """All grid cells in deterministic order"""
        sizes = self.np_ratios if self.np_ratios is not None else self.n_values
        cells = []
        for index, (kind, p, size, sigma, noise) in enumerate(
            product(self.kinds, self.p_values, sizes, self.sigma_values, self.noise_values)
        ):
            n = max(1, int(round(size * p))) if self.np_ratios is not None else int(size)
            cells.append(Cell(index=index, kind=kind, p=p, n=n, sigma=sigma, noise_sigma=noise))
        return cells


@dataclass(frozen=True)
class Cell:
    """One grid point"""
    index: int
    kind: EnsembleKind
    p: int
    n: int
    sigma: float
    noise_sigma: float

    def ensemble_spec(self, master_seed: int, trial: int) -> EnsembleSpec:
        return EnsembleSpec(kind=self.kind, p=self.p, n=self.n, sigma=self.sigma,
                            noise_sigma=self.noise_sigma,
                            seed=trial_seed(master_seed, self.index, trial))


def trial_seed(master_seed: int, cell_index: int, trial: int) -> int:
    return derive_seed(master_seed, cell_index, trial)


@dataclass
class TrialRecord:
    """One CSV row: a solver run on one trial instance"""
    experiment: str
    cell: int
    solver: str
    kind: str
    p: int
    n: int
    sigma: float
    noise_sigma: float
    trial: int
    seed: int
    rel_err: float
    success: bool
    iters_phase1: int
    iters_phase2: int
    time_seconds: float
    final_grad_norm: float
    certificate_passed: Optional[bool]
    status: str

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @property
    def sort_key(self):
        return (self.cell, self.trial, SOLVER_ORDER.get(self.solver, len(SOLVER_ORDER)))


SOLVER_ORDER = {solver.value: i for i, solver in enumerate(SolverName)}
