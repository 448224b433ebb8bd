#!/usr/bin/env python3
"""Run one named experiment with its default parameters.

Writes the canonical config it ran with next to the outputs, so the run is
trivially reproducible via `certlab run --config <out>/used_config.cfg`.

Usage: python3 scripts/run_experiment.py error-accumulation [--seed 0] [--out runs/one-off]
"""

import argparse
import sys
from pathlib import Path

from certlab import cli
from certlab.config import ExperimentConfig, canonical_text
from certlab.experiments import EXPERIMENTS, default_params


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    out_dir = Path(args.out or f"runs/{args.experiment}")
    out_dir.mkdir(parents=True, exist_ok=True)
    config = ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        params=default_params(args.experiment),
        output_dir=str(out_dir),
    )
    cfg_path = out_dir / "used_config.cfg"
    cfg_path.write_text(canonical_text(config))
    return cli.main(["run", "--config", str(cfg_path), "--out", str(out_dir)])


if __name__ == "__main__":
    sys.exit(main())
