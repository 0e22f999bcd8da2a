#!/usr/bin/env python3
"""
QMR Toolkit - Main Entry Point

Command-line front end for quadratic measurements regression: recovering a
signal x from n noisy quadratic measurements b_i = <A_i x, x> + noise.

Key Features:
- Synthetic instances from real Gaussian, complex Gaussian and complex
  sub-Gaussian ensembles, stored as versioned .npz files
- GRNM: a two-phase gradient-regularized Newton solver with a local
  minimality certificate
- WF: a Wirtinger-flow baseline with spectral initialization
- Finite-difference validation of the analytic gradient and Hessian
- Reproducible Monte-Carlo benchmarks with CSV output and SVG charts

Usage:
    qmr generate --kind real_gaussian --p 16 --n 128 --seed 7 --out inst.npz
    qmr solve --instance inst.npz --trace trace.csv
    qmr check --instance inst.npz --fd-check
    qmr bench --preset fig1 --jobs 4 --out-dir results
"""

import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to Python path for imports
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.cli.command_parser import CommandParser  # noqa: E402
from src.cli.handlers import HANDLERS  # noqa: E402
from src.utils.errors import QMRError  # noqa: E402
from src.utils.settings import load_settings  # noqa: E402

logger = logging.getLogger("qmr")


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function - parse arguments and dispatch a subcommand

    Returns:
        Process exit code (0 on success)
    """
    try:
        settings = load_settings()
    except QMRError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 1

    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    command = CommandParser(settings).parse_command(argv)
    logger.debug(f"Command: {command.name} {command.options}")

    try:
        return HANDLERS[command.name](command, settings)
    except QMRError as e:
        logger.error(f"{command.name} failed: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
