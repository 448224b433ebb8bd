#!/usr/bin/env python3
"""Run the full verification battery and render reports for every experiment.

Equivalent to `certlab verify-all --out <dir>` followed by
`certlab report --format md` and `--format svg` on each manifest.

Usage: python3 scripts/verify_all.py [--out runs] [--seed 0] [--threads 1]
"""

import argparse
import sys
from pathlib import Path

from certlab import cli
from certlab.experiments import EXPERIMENTS


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    code = cli.main(
        ["verify-all", "--out", args.out, "--seed", str(args.seed), "--threads", str(args.threads)]
    )
    for name in sorted(EXPERIMENTS):
        manifest = Path(args.out) / name / "manifest.json"
        if manifest.exists():
            cli.main(["report", "--manifest", str(manifest), "--format", "md"])
            cli.main(["report", "--manifest", str(manifest), "--format", "svg"])
    return code


if __name__ == "__main__":
    sys.exit(main())
