#!/usr/bin/env python3
"""
Experiment Execution Engine - runs experiment grids trial by trial

This module orchestrates a benchmark: it expands an ExperimentSpec into
cells and trials, generates one instance per trial, runs every requested
solver on that same instance, scores the results and collects TrialRecords.

Key Features:
- Per-trial seeds derived from (master seed, cell, trial)
- Shared measurement set for all solvers of a trial
- Trial-level parallelism on a process pool driven from asyncio
- Failures recorded as rows, never aborting the experiment
- Progress tracking with status callbacks
- Records sorted by (cell, trial, solver) independent of worker count
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, List, Optional

from ..core import grnm, wf_baseline
from ..core.grnm import SolveResult
from ..core.metrics import AggregateSummary, TrialOutcome, aggregate, classify_success, relative_error
from ..core.objective import QuadraticResidualModel
from ..ensembles.frame_bounds import estimate_frame_bounds
from ..ensembles.generator import MeasurementSet, generate_instance
from ..utils.seeding import StreamRole, make_rng
from ..utils.settings import DEFAULT_MAX_ENTRIES
from .experiment import Cell, ExperimentSpec, SolverName, TrialRecord

logger = logging.getLogger(__name__)


class ExperimentStatus(Enum):
    """Experiment run status"""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class ExperimentRun:
    """Bookkeeping for one experiment run"""
    run_id: str
    spec: ExperimentSpec
    status: ExperimentStatus = ExperimentStatus.PENDING
    start_time: Optional[datetime] = None
    end_time: Optional[datetime] = None
    total_trials: int = 0
    completed_trials: int = 0
    records: List[TrialRecord] = field(default_factory=list)
    error_message: Optional[str] = None

    progress_callbacks: List[Callable] = field(default_factory=list)

    @property
    def progress(self) -> float:
        if not self.total_trials:
            return 0.0
        return 100.0 * self.completed_trials / self.total_trials


def _run_solver(solver: SolverName, measurements: MeasurementSet, spec: ExperimentSpec,
                seed: int, frame_lower: Optional[float]) -> SolveResult:
    model = QuadraticResidualModel(measurements)
    if solver is SolverName.GRNM:
        return grnm.solve(model, spec.grnm, rng=make_rng(seed, StreamRole.INIT),
                          frame_lower=frame_lower)
    result = wf_baseline.wf_solve(model, spec.wf)
    if frame_lower is not None:
        result.certificate = grnm.certify_local_min(model, result.x_hat, frame_lower)
    return result


def _record(spec: ExperimentSpec, cell: Cell, trial: int, seed: int, solver: SolverName,
            **values) -> TrialRecord:
    return TrialRecord(
        experiment=spec.name, cell=cell.index, solver=solver.value, kind=cell.kind.value,
        p=cell.p, n=cell.n, sigma=cell.sigma, noise_sigma=cell.noise_sigma,
        trial=trial, seed=seed, **values,
    )


def _failure_record(spec, cell, trial, seed, solver, elapsed: float) -> TrialRecord:
    return _record(spec, cell, trial, seed, solver, rel_err=float("nan"), success=False,
                   iters_phase1=0, iters_phase2=0, time_seconds=elapsed,
                   final_grad_norm=float("nan"), certificate_passed=None, status="Error")


def failure_rows(spec: ExperimentSpec, cell: Cell, trial: int) -> List[TrialRecord]:
    """One Error row per solver for a trial that produced no results"""
    seed = cell.ensemble_spec(spec.master_seed, trial).seed
    return [_failure_record(spec, cell, trial, seed, s, 0.0) for s in spec.solvers]


def run_trial(spec: ExperimentSpec, cell: Cell, trial: int,
              max_entries: int = DEFAULT_MAX_ENTRIES) -> List[TrialRecord]:
    """Generate one instance and run every requested solver on it

    Module-level so process pools can pickle it. Instances with more than
    `max_entries` matrix entries become Error rows.
    """
    ensemble = cell.ensemble_spec(spec.master_seed, trial)
    seed = ensemble.seed
    try:
        measurements = generate_instance(ensemble, max_entries=max_entries)
        frame_lower = None
        if spec.certify:
            frame_lower = estimate_frame_bounds(measurements, spec.frame_samples).lower
    except Exception as e:
        logger.error(f"Instance generation failed (cell {cell.index}, trial {trial}): {e}")
        return failure_rows(spec, cell, trial)

    records = []
    for solver in spec.solvers:
        start = time.perf_counter()
        try:
            result = _run_solver(solver, measurements, spec, seed, frame_lower)
        except Exception as e:
            logger.error(f"{solver.value} failed (cell {cell.index}, trial {trial}): {e}")
            records.append(_failure_record(spec, cell, trial, seed, solver, time.perf_counter() - start))
            continue

        rel_err = relative_error(result.x_hat, measurements.truth)
        records.append(_record(
            spec, cell, trial, seed, solver,
            rel_err=rel_err,
            success=classify_success(rel_err, noisy=measurements.noisy),
            iters_phase1=result.phase1_iters,
            iters_phase2=result.phase2_iters,
            time_seconds=result.wall_time,
            final_grad_norm=result.final_grad_norm,
            certificate_passed=result.certificate.passed if result.certificate else None,
            status=result.status.value,
        ))
    return records


def outcome_of(record: TrialRecord) -> TrialOutcome:
    return TrialOutcome(rel_err=record.rel_err, success=record.success,
                        wall_time=record.time_seconds,
                        iters=(record.iters_phase1, record.iters_phase2),
                        final_grad_norm=record.final_grad_norm,
                        certificate_passed=record.certificate_passed)


def summarize(records: List[TrialRecord]) -> Dict[tuple, AggregateSummary]:
    """Aggregate per (cell, solver), failure rows included"""
    groups: Dict[tuple, List[TrialOutcome]] = {}
    for record in records:
        groups.setdefault((record.cell, record.solver), []).append(outcome_of(record))
    return {key: aggregate(outcomes) for key, outcomes in sorted(groups.items())}


class ExperimentEngine:
    """Experiment execution engine

    Runs trials inline when jobs == 1 and on a process pool otherwise. The
    merge step sorts records, so output never depends on completion order.
    """

    def __init__(self, jobs: int = 1, progress_callbacks: Optional[List[Callable]] = None,
                 max_entries: int = DEFAULT_MAX_ENTRIES):
        self.jobs = max(1, int(jobs))
        self.max_entries = max_entries
        self.progress_callbacks = list(progress_callbacks or [])
        self.active_runs: Dict[str, ExperimentRun] = {}

    async def run(self, spec: ExperimentSpec, run_id: Optional[str] = None) -> ExperimentRun:
        """Execute every (cell, trial) of the spec

        Args:
            spec: experiment grid
            run_id: optional identifier

        Returns:
            ExperimentRun with sorted records
        """
        self.cleanup_completed_runs()
        run_id = run_id or f"{spec.name}_{int(time.time())}"
        cells = spec.cells()
        experiment = ExperimentRun(run_id=run_id, spec=spec,
                                   total_trials=len(cells) * spec.trials_per_cell)
        experiment.progress_callbacks.extend(self.progress_callbacks)
        self.active_runs[run_id] = experiment

        experiment.status = ExperimentStatus.RUNNING
        experiment.start_time = datetime.now()
        logger.info(
            f"Experiment {spec.name}: {len(cells)} cells x {spec.trials_per_cell} trials x "
            f"{len(spec.solvers)} solvers on {self.jobs} worker(s)"
        )

        try:
            tasks = [(cell, trial) for cell in cells for trial in range(spec.trials_per_cell)]
            if self.jobs == 1:
                for cell, trial in tasks:
                    await self._collect(experiment, run_trial(spec, cell, trial, self.max_entries))
            else:
                loop = asyncio.get_running_loop()
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    futures = [
                        self._await_trial(loop.run_in_executor(pool, run_trial, spec, cell, trial,
                                                               self.max_entries), spec, cell, trial)
                        for cell, trial in tasks
                    ]
                    for future in asyncio.as_completed(futures):
                        await self._collect(experiment, await future)
            experiment.records.sort(key=lambda r: r.sort_key)
            experiment.status = ExperimentStatus.COMPLETED
        except Exception as e:
            experiment.status = ExperimentStatus.FAILED
            experiment.error_message = str(e)
            logger.error(f"Experiment {spec.name} failed: {e}")
            raise
        finally:
            experiment.end_time = datetime.now()

        logger.info(f"Experiment completed: {run_id} ({len(experiment.records)} records)")
        return experiment

    async def _await_trial(self, future, spec: ExperimentSpec, cell: Cell, trial: int) -> List[TrialRecord]:
        """Records of one pooled trial; a dead worker pool yields Error rows"""
        try:
            return await future
        except BrokenProcessPool as e:
            logger.error(f"Worker pool failed (cell {cell.index}, trial {trial}): {e}")
            return failure_rows(spec, cell, trial)

    async def _collect(self, experiment: ExperimentRun, records: List[TrialRecord]):
        experiment.records.extend(records)
        experiment.completed_trials += 1
        await self._notify_progress(experiment)

    async def _notify_progress(self, experiment: ExperimentRun):
        for callback in experiment.progress_callbacks:
            try:
                await callback(experiment)
            except Exception as e:
                logger.error(f"Progress callback error: {e}")

    def get_run(self, run_id: str) -> Optional[ExperimentRun]:
        return self.active_runs.get(run_id)

    def cleanup_completed_runs(self):
        """Drop completed or failed runs from active_runs"""
        finished = [run_id for run_id, run in self.active_runs.items()
                    if run.status in (ExperimentStatus.COMPLETED, ExperimentStatus.FAILED)]
        for run_id in finished:
            del self.active_runs[run_id]
        if finished:
            logger.info(f"Finished runs cleaned up: {len(finished)}")


def run_experiment(spec: ExperimentSpec, jobs: int = 1,
                   max_entries: int = DEFAULT_MAX_ENTRIES) -> List[TrialRecord]:
    """Synchronous entry point: records ordered by (cell, trial, solver)"""
    return asyncio.run(ExperimentEngine(jobs, max_entries=max_entries).run(spec)).records
