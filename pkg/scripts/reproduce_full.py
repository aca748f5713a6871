#!/usr/bin/env python3
"""Regenerate the regret traces for every packaged scenario.

Writes one CSV per scenario into --out-dir via the same code path as
``profitbandit run``, so the files carry the usual metadata header and
are byte-reproducible for a fixed seed.  At full scale (horizon 10^4,
10^4 trajectories) expect hours of CPU per scenario; ``--desk-scale``
(horizon 5000, 1000 trajectories) is the size used by the acceptance
tests and finishes in minutes with a few workers.
"""

import argparse
import sys
import time
from pathlib import Path

from profitbandit.cli import main as cli_main
from profitbandit.presets import PRESETS


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="regenerate the packaged scenarios' regret traces"
    )
    parser.add_argument(
        "--out-dir", default="results", metavar="DIR", help="where the CSVs go"
    )
    parser.add_argument(
        "--scenario",
        action="append",
        choices=list(PRESETS),
        metavar="NAME",
        help="repeatable; default is every packaged scenario",
    )
    parser.add_argument("--desk-scale", action="store_true", help="5000 x 1000 runs")
    parser.add_argument(
        "--horizon", type=int, default=None, metavar="N", help="pilot-size override"
    )
    parser.add_argument(
        "--trajectories", type=int, default=None, metavar="N", help="pilot-size override"
    )
    parser.add_argument("--workers", type=int, default=1, metavar="N")
    parser.add_argument("--seed", type=int, default=None, metavar="S")
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pilot = args.horizon is not None or args.trajectories is not None
    label = "pilot" if pilot else ("desk" if args.desk_scale else "full")
    for name in args.scenario or list(PRESETS):
        out = out_dir / f"{name}-{label}.csv"
        run_argv = ["run", name, "--workers", str(args.workers), "--out", str(out)]
        if args.desk_scale:
            run_argv.append("--desk-scale")
        if args.horizon is not None:
            run_argv += ["--horizon", str(args.horizon)]
        if args.trajectories is not None:
            run_argv += ["--trajectories", str(args.trajectories)]
        if args.seed is not None:
            run_argv += ["--seed", str(args.seed)]
        start = time.perf_counter()
        code = cli_main(run_argv)
        if code != 0:
            return code
        print(f"{name}: wrote {out} in {time.perf_counter() - start:.1f} s", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
