"""Subcommand handlers for the `qmr` CLI."""

import asyncio
import json
import logging
from pathlib import Path
from typing import List

import numpy as np
from pydantic import ValidationError

from ..core import grnm, wf_baseline
from ..core.diagnostics import finite_difference_check
from ..core.grnm import GrnmConfig, write_trace_csv
from ..core.metrics import classify_success, relative_error
from ..core.objective import QuadraticResidualModel
from ..core.wf_baseline import WfConfig
from ..ensembles.frame_bounds import estimate_frame_bounds
from ..ensembles.generator import EnsembleKind, EnsembleSpec, generate_instance
from ..ensembles.storage import load_instance, save_instance
from ..harness.execution_engine import ExperimentEngine, summarize
from ..harness.experiment import ExperimentSpec
from ..harness.presets import build_preset, preset_plots
from ..harness.reporting import emit_csv
from ..ui.plots import PlotKind, emit_plot
from ..utils.errors import InvalidConfigError
from ..utils.seeding import StreamRole, make_rng
from ..utils.settings import Settings
from .command_parser import ParsedCommand

logger = logging.getLogger(__name__)


def handle_generate(command: ParsedCommand, settings: Settings) -> int:
    try:
        spec = EnsembleSpec(kind=EnsembleKind(command.get("kind")), p=command.get("p"),
                            n=command.get("n"), sigma=command.get("sigma"),
                            noise_sigma=command.get("noise"), seed=command.get("seed"))
    except ValueError as e:
        raise InvalidConfigError(f"Invalid ensemble parameters: {e}") from e

    measurements = generate_instance(spec, max_entries=settings.max_entries)
    path = save_instance(measurements, command.get("out"))
    print(f"✅ Generated {spec.kind.value} instance p={spec.p} n={spec.n} -> {path}")
    return 0


def handle_solve(command: ParsedCommand, settings: Settings) -> int:
    measurements = load_instance(command.get("instance"))
    model = QuadraticResidualModel(measurements)

    frame_lower = None
    if command.get("certify", False):
        bounds = estimate_frame_bounds(measurements, command.get("frame_samples"),
                                       make_rng(command.get("seed"), StreamRole.FRAME))
        frame_lower = bounds.lower
        print(f"📐 Frame bounds: lower={bounds.lower:.4f} upper={bounds.upper:.4f}")

    if command.get("solver") == "wf":
        config = WfConfig.build(alpha=command.options.get("alpha"), eps=command.options.get("eps"),
                                max_iters=command.options.get("max_iters"))
        result = wf_baseline.wf_solve(model, config)
        if frame_lower is not None:
            result.certificate = grnm.certify_local_min(model, result.x_hat, frame_lower)
    else:
        keys = ["eps", "complex_eps", "beta", "delta", "mu1", "mu2", "eps1", "alpha1", "alpha2",
                "max_iters"]
        config = GrnmConfig.build(**{k: command.options.get(k) for k in keys})
        result = grnm.solve(model, config, rng=make_rng(command.get("seed"), StreamRole.INIT),
                            frame_lower=frame_lower)

    rel_err = relative_error(result.x_hat, measurements.truth)
    success = classify_success(rel_err, noisy=measurements.noisy)
    print(f"🧮 Status: {result.status.value}")
    print(f"   Iterations: {result.phase1_iters} + {result.phase2_iters}")
    print(f"   f = {result.final_value:.3e}, ||g|| = {result.final_grad_norm:.3e}")
    print(f"   Relative error: {rel_err:.3e} ({'success' if success else 'failure'})")
    print(f"   Time: {result.wall_time:.3f} s")
    for note in result.notes:
        print(f"⚠️  {note}")
    if result.certificate is not None:
        cert = result.certificate
        verdict = "passed" if cert.passed else "not passed"
        print(f"📜 Certificate {verdict}: ||S|| = {cert.s_norm:.3e} vs {cert.threshold:.3e}")

    if command.get("trace"):
        path = write_trace_csv(result, command.get("trace"))
        print(f"📝 Trace written to {path}")
    return 0


def handle_check(command: ParsedCommand, settings: Settings) -> int:
    measurements = load_instance(command.get("instance"))
    if not command.get("fd_check", False):
        print("Nothing to check; pass --fd-check")
        return 0

    model = QuadraticResidualModel(measurements)
    scale = float(np.linalg.norm(measurements.truth.values)) / np.sqrt(measurements.d)
    report = finite_difference_check(model, command.get("points"),
                                     make_rng(command.get("seed"), StreamRole.INIT), scale=max(scale, 1e-3))
    print(f"🔍 Gradient max relative error: {report.max_gradient_error:.2e}")
    print(f"🔍 Hessian max relative error:  {report.max_hessian_error:.2e}")
    print("✅ PASS" if report.passed else "❌ FAIL")
    return 0 if report.passed else 1


def _merge_grid(spec: ExperimentSpec, file_values: dict) -> ExperimentSpec:
    """Layer config-file values over a preset; a file size grid replaces the preset one"""
    data = spec.model_dump()
    data.update(file_values)
    if "n_values" in file_values and "np_ratios" not in file_values:
        data["np_ratios"] = None
    if "np_ratios" in file_values and "n_values" not in file_values:
        data["n_values"] = None
    try:
        return ExperimentSpec.model_validate(data)
    except ValidationError as e:
        raise InvalidConfigError(f"Invalid experiment config: {e}") from e


def _bench_spec(command: ParsedCommand) -> ExperimentSpec:
    preset = command.get("preset")
    config = command.get("config")
    if preset is None and config is None:
        raise InvalidConfigError("bench needs --config and/or --preset")

    if preset is None:
        spec = ExperimentSpec.from_json_file(config)
    else:
        spec = build_preset(preset, full=command.get("full", False))
        if config is not None:
            try:
                file_values = json.loads(Path(config).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise InvalidConfigError(f"Invalid experiment config {config}: {e}") from e
            spec = _merge_grid(spec, file_values)
    return spec.with_overrides(master_seed=command.get("seed"), trials_per_cell=command.get("trials"))


def default_plots(spec: ExperimentSpec) -> List[PlotKind]:
    """Plots for a config-file grid: whichever axes actually vary"""
    plots = [PlotKind.ERR_VS_P] if len(spec.p_values) > 1 else []
    if spec.np_ratios is not None and len(spec.np_ratios) > 1:
        plots.append(PlotKind.SUCCESS_VS_RATIO)
    elif spec.n_values is not None and len(spec.n_values) > 1:
        plots.append(PlotKind.ERR_VS_N)
    if len(spec.sigma_values) > 1:
        plots.append(PlotKind.ERR_VS_SIGMA)
    return plots or [PlotKind.ERR_VS_P]


def handle_bench(command: ParsedCommand, settings: Settings) -> int:
    spec = _bench_spec(command)
    out_dir = Path(command.get("out_dir"))
    jobs = command.get("jobs", settings.jobs)

    async def report_progress(run):
        if run.completed_trials % max(1, run.total_trials // 10) == 0:
            logger.info(f"Progress: {run.progress:.0f}% ({run.completed_trials}/{run.total_trials} trials)")

    print(f"🚀 Running experiment {spec.name!r} with {jobs} worker(s)")
    run = asyncio.run(ExperimentEngine(jobs, [report_progress], max_entries=settings.max_entries).run(spec))
    csv_path = emit_csv(run.records, out_dir / f"{spec.name}.csv")
    print(f"📊 {len(run.records)} records -> {csv_path}")

    plots = preset_plots(command.get("preset")) if command.get("preset") else default_plots(spec)
    for kind in plots:
        emit_plot(run.records, kind, out_dir / f"{spec.name}.{kind.value}.svg")
        print(f"📈 {kind.value} -> {out_dir / f'{spec.name}.{kind.value}.svg'}")

    cells = {c.index: c for c in spec.cells()}
    for (cell_index, solver), summary in summarize(run.records).items():
        cell = cells[cell_index]
        print(f"   [{cell_index:3d}] {solver:4s} {cell.kind.value} p={cell.p} n={cell.n} "
              f"sigma={cell.sigma:g} noise={cell.noise_sigma:g}: "
              f"success={summary.success_rate:.2f} mean_err={summary.mean_rel_err:.2e} "
              f"median_err={summary.median_rel_err:.2e} time={summary.mean_time:.3f}s "
              f"iters={summary.mean_iters:.1f}")
    return 0


HANDLERS = {
    "generate": handle_generate,
    "solve": handle_solve,
    "check": handle_check,
    "bench": handle_bench,
}
