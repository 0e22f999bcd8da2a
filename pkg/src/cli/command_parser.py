#!/usr/bin/env python3
"""
Command Parser - argparse front end of the `qmr` tool

Subcommands:
- generate: synthesize an instance and store it
- solve:    run GRNM (default) or the WF baseline on a stored instance
- check:    finite-difference validation of the analytic derivatives
- bench:    run an experiment grid from a JSON config and/or preset

Parsed arguments are returned as a ParsedCommand so handlers never touch
argparse directly.
"""

import argparse
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..ensembles.generator import EnsembleKind
from ..harness.presets import preset_names
from ..utils.settings import Settings


@dataclass
class ParsedCommand:
    """Subcommand name plus its options"""
    name: str
    options: Dict[str, Any] = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        value = self.options.get(key)
        return default if value is None else value


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


class CommandParser:
    """Builds the `qmr` argument parser"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.parser = self._build()

    def _build(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="qmr",
            description="Quadratic measurements regression: instances, GRNM/WF solvers, benchmarks",
        )
        sub = parser.add_subparsers(dest="command", required=True)

        gen = sub.add_parser("generate", help="Synthesize an instance")
        gen.add_argument("--kind", required=True, choices=[k.value for k in EnsembleKind])
        gen.add_argument("--p", type=int, required=True)
        gen.add_argument("--n", type=int, required=True)
        gen.add_argument("--sigma", type=float, default=1.0)
        gen.add_argument("--noise", type=float, default=0.0)
        gen.add_argument("--seed", type=_u64, default=0)
        gen.add_argument("--out", required=True)

        solve = sub.add_parser("solve", help="Solve a stored instance")
        solve.add_argument("--instance", required=True)
        solve.add_argument("--solver", choices=["grnm", "wf"], default="grnm")
        solve.add_argument("--eps", type=float)
        solve.add_argument("--complex-eps", type=float, dest="complex_eps",
                           help="Phase-II tolerance on noiseless complex instances")
        solve.add_argument("--beta", type=float)
        solve.add_argument("--delta", type=float)
        solve.add_argument("--mu1", type=float)
        solve.add_argument("--mu2", type=float)
        solve.add_argument("--eps1", type=float)
        solve.add_argument("--alpha1", type=float)
        solve.add_argument("--alpha2", type=float)
        solve.add_argument("--alpha", type=float, help="WF base step")
        solve.add_argument("--max-iters", type=int, dest="max_iters")
        solve.add_argument("--seed", type=_u64, default=0)
        solve.add_argument("--trace", help="Write the iteration trace CSV here")
        solve.add_argument("--certify", action="store_true")
        solve.add_argument("--frame-samples", type=int, default=10_000, dest="frame_samples")

        check = sub.add_parser("check", help="Validate derivatives on a stored instance")
        check.add_argument("--instance", required=True)
        check.add_argument("--fd-check", action="store_true", dest="fd_check")
        check.add_argument("--points", type=int, default=5)
        check.add_argument("--seed", type=_u64, default=0)

        bench = sub.add_parser("bench", help="Run an experiment grid")
        bench.add_argument("--config")
        bench.add_argument("--preset", choices=preset_names())
        bench.add_argument("--full", action="store_true")
        bench.add_argument("--out-dir", default="results", dest="out_dir")
        bench.add_argument("--jobs", type=int, default=self.settings.jobs)
        bench.add_argument("--seed", type=_u64)
        bench.add_argument("--trials", type=int)

        return parser

    def parse_command(self, argv: Optional[List[str]] = None) -> ParsedCommand:
        """Parse argv (sys.argv[1:] when None)"""
        namespace = vars(self.parser.parse_args(argv))
        name = namespace.pop("command")
        return ParsedCommand(name=name, options=namespace)
