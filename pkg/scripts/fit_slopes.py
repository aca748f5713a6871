#!/usr/bin/env python3
"""Fit mean regret against log t in a regret CSV and compare to the bounds.

Reads a CSV written by ``profitbandit run`` (or scripts/reproduce_full.py),
restricts each policy's trace to a late-time window, least-squares fits
mean regret on log t, and prints the fitted slope with its R^2 next to
the asymptotic lower/upper slopes echoed in the file header.  A slope
between the two header values (with R^2 near 1) is the expected picture
for the index policies; the oracle fits at slope 0.
"""

import argparse
import sys
from collections import defaultdict

import numpy as np


def read_trace(path):
    """Return (bound_slopes | None, {policy label: (times, mean regrets)})."""
    bound_slopes = None
    rows = defaultdict(lambda: ([], []))
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if line.startswith("# bound-slopes lower="):
                fields = dict(
                    part.split("=", 1) for part in line[2:].split() if "=" in part
                )
                bound_slopes = (float(fields["lower"]), float(fields["upper"]))
            elif line.startswith("#") or line.startswith("policy,") or not line:
                continue
            else:
                label, t, mean, _err = line.split(",")
                rows[label][0].append(int(t))
                rows[label][1].append(float(mean))
    return bound_slopes, {
        label: (np.asarray(ts), np.asarray(ms)) for label, (ts, ms) in rows.items()
    }


def fit_log_slope(times, means, t_min, t_max):
    window = (times >= t_min) & (times <= t_max)
    if int(window.sum()) < 3:
        raise SystemExit(f"window [{t_min}, {t_max}] keeps fewer than 3 samples")
    x = np.log(times[window].astype(float))
    y = means[window]
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (intercept + slope * x)
    total = y - y.mean()
    denom = float(total @ total)
    r_squared = 1.0 if denom == 0.0 else 1.0 - float(residual @ residual) / denom
    return float(slope), r_squared


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="least-squares slope of mean regret vs log t, per policy"
    )
    parser.add_argument("csv", help="regret CSV from 'profitbandit run'")
    parser.add_argument(
        "--t-min", type=int, default=None, metavar="T",
        help="window start (default: horizon / 10)",
    )
    parser.add_argument(
        "--t-max", type=int, default=None, metavar="T",
        help="window end (default: horizon)",
    )
    args = parser.parse_args(argv)

    bound_slopes, traces = read_trace(args.csv)
    if not traces:
        raise SystemExit(f"{args.csv} holds no data rows")
    horizon = max(int(times[-1]) for times, _ in traces.values())
    t_min = args.t_min if args.t_min is not None else max(2, horizon // 10)
    t_max = args.t_max if args.t_max is not None else horizon

    print(f"window t in [{t_min}, {t_max}] of horizon {horizon}")
    print(f"{'policy':<20} {'slope':>12} {'R^2':>8}")
    for label in sorted(traces):
        slope, r_squared = fit_log_slope(*traces[label], t_min, t_max)
        print(f"{label:<20} {slope:>12.3f} {r_squared:>8.4f}")
    if bound_slopes is not None:
        lower, upper = bound_slopes
        print(f"asymptotic slope bounds: lower {lower:.3f}, upper {upper:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
