"""
Named experiment presets.

Each preset has a desk-scale grid (default, minutes on a laptop) and the
published full-scale grid selected with `full=True`. `plots` lists the chart
kinds emitted after the run.
"""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..ensembles.generator import EnsembleKind
from ..ui.plots import PlotKind
from ..utils.errors import InvalidConfigError
from .experiment import ExperimentSpec, SolverName

DESK_TRIALS = 20


@dataclass(frozen=True)
class Preset:
    desk: dict
    full: dict
    plots: List[PlotKind]


def _grid(start: float, stop: float, step: float) -> List[float]:
    return [round(float(v), 4) for v in np.arange(start, stop + step / 2, step)]


_BOTH_NOISE = [0.0, 0.1]
_COMPLEX_RATIOS = _grid(1.5, 4.0, 0.25)

PRESETS: Dict[str, Preset] = {
    "table1": Preset(
        desk=dict(kinds=list(EnsembleKind), p_values=[50], np_ratios=[4.0],
                  sigma_values=[1.0, 2.0, 5.0], noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=list(EnsembleKind), p_values=[100], n_values=[400],
                  sigma_values=[float(s) for s in range(1, 11)], noise_values=_BOTH_NOISE,
                  trials_per_cell=100),
        plots=[PlotKind.ERR_VS_SIGMA],
    ),
    "fig1": Preset(
        desk=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=[50], np_ratios=_grid(1.0, 2.0, 0.1),
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=[100], np_ratios=_grid(1.0, 2.0, 0.1),
                  noise_values=_BOTH_NOISE, trials_per_cell=100),
        plots=[PlotKind.SUCCESS_VS_RATIO],
    ),
    "fig2": Preset(
        desk=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=[50, 100], np_ratios=[4.0],
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=list(range(100, 501, 50)),
                  np_ratios=[4.0], noise_values=_BOTH_NOISE, trials_per_cell=25),
        plots=[PlotKind.ERR_VS_P, PlotKind.TIME_VS_P],
    ),
    "fig3": Preset(
        desk=dict(kinds=[EnsembleKind.COMPLEX_GAUSSIAN], p_values=[50], np_ratios=_COMPLEX_RATIOS,
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.COMPLEX_GAUSSIAN], p_values=[100], np_ratios=_COMPLEX_RATIOS,
                  noise_values=_BOTH_NOISE, trials_per_cell=100),
        plots=[PlotKind.SUCCESS_VS_RATIO],
    ),
    "fig4": Preset(
        desk=dict(kinds=[EnsembleKind.COMPLEX_GAUSSIAN], p_values=[50, 100], np_ratios=[4.0],
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.COMPLEX_GAUSSIAN], p_values=list(range(100, 251, 25)),
                  np_ratios=[4.0], noise_values=_BOTH_NOISE, trials_per_cell=25),
        plots=[PlotKind.ERR_VS_P, PlotKind.TIME_VS_P],
    ),
    "fig5": Preset(
        desk=dict(kinds=[EnsembleKind.COMPLEX_SUBGAUSSIAN], p_values=[50], np_ratios=_COMPLEX_RATIOS,
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.COMPLEX_SUBGAUSSIAN], p_values=[100], np_ratios=_COMPLEX_RATIOS,
                  noise_values=_BOTH_NOISE, trials_per_cell=100),
        plots=[PlotKind.SUCCESS_VS_RATIO],
    ),
    "fig6": Preset(
        desk=dict(kinds=[EnsembleKind.COMPLEX_SUBGAUSSIAN], p_values=[50, 100], np_ratios=[4.0],
                  noise_values=_BOTH_NOISE, trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.COMPLEX_SUBGAUSSIAN], p_values=list(range(100, 251, 25)),
                  np_ratios=[4.0], noise_values=_BOTH_NOISE, trials_per_cell=25),
        plots=[PlotKind.ERR_VS_P, PlotKind.TIME_VS_P],
    ),
    "rate": Preset(
        desk=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=[50], n_values=[500, 1000, 2000],
                  noise_values=[0.1], solvers=[SolverName.GRNM], trials_per_cell=DESK_TRIALS),
        full=dict(kinds=[EnsembleKind.REAL_GAUSSIAN], p_values=[100], n_values=[400, 800, 1600, 3200, 6400],
                  noise_values=[0.1], solvers=[SolverName.GRNM], trials_per_cell=100),
        plots=[PlotKind.ERR_VS_N],
    ),
}


def preset_names() -> List[str]:
    return sorted(PRESETS)


def build_preset(name: str, full: bool = False, master_seed: int = 0) -> ExperimentSpec:
    """ExperimentSpec for a named preset"""
    if name not in PRESETS:
        raise InvalidConfigError(f"Unknown preset {name!r}; choose from {', '.join(preset_names())}")
    grid = PRESETS[name].full if full else PRESETS[name].desk
    return ExperimentSpec(name=name if not full else f"{name}_full", master_seed=master_seed, **grid)


def preset_plots(name: str) -> List[PlotKind]:
    return list(PRESETS[name].plots) if name in PRESETS else []
