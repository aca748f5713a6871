"""Command-line front end.

Three subcommands:

``run``
    Simulate a packaged scenario (or a ``--config`` file) and emit the
    averaged regret traces as CSV with a ``#``-prefixed metadata header.
``bounds``
    Print the per-arm divergence table and the asymptotic lower/upper
    regret slopes for a scenario.
``scenarios``
    List the packaged scenarios with their full parameter tables.

Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error.

The CSV bytes depend only on the experiment definition (scenario,
roster, horizon, trajectories, seed, grid) and the artifact version —
never on ``--workers`` or ``--out``.  Data numbers are serialized with
17 significant digits, ``.`` decimal separator, and ``\\n`` line
endings; parameter echoes in the header use the shortest round-trip
form for readability.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Sequence, TextIO

from . import __version__
from .bounds import bound_report
from .configfile import ConfigError, parse_config
from .environment import ArmSpec, ClientCountLaw
from .families import DomainError
from .policies import PolicyConfig
from .presets import DESK_HORIZON, DESK_TRAJECTORIES, PRESETS, get_preset
from .randomness import STREAM_ALGORITHM
from .simulate import ExperimentConfig, RegretTrace, run_experiment

__all__ = ["main"]


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profitbandit",
        description="Threshold-profitability bandit simulations and bound reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{run,bounds,scenarios}")

    run_p = sub.add_parser("run", help="simulate a scenario and emit a regret CSV")
    run_p.add_argument("preset", nargs="?", help="packaged scenario name (see 'scenarios')")
    run_p.add_argument("--config", metavar="PATH", help="config file instead of a preset")
    run_p.add_argument("--horizon", type=int, metavar="N", help="rounds per trajectory")
    run_p.add_argument(
        "--trajectories", type=int, metavar="N", help="Monte Carlo repetitions"
    )
    run_p.add_argument("--seed", type=int, metavar="S", help="base seed (default 1)")
    run_p.add_argument(
        "--policies",
        metavar="LIST",
        help="comma-separated subset of the scenario's policy roster",
    )
    run_p.add_argument(
        "--desk-scale",
        action="store_true",
        help=f"shrink to horizon {DESK_HORIZON}, {DESK_TRAJECTORIES} trajectories",
    )
    run_p.add_argument(
        "--workers",
        type=int,
        default=1,
        metavar="N",
        help="worker processes; affects speed, never output bytes",
    )
    run_p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    run_p.set_defaults(func=cmd_run)

    bounds_p = sub.add_parser("bounds", help="print the asymptotic regret-slope report")
    bounds_p.add_argument("preset", nargs="?", help="packaged scenario name")
    bounds_p.add_argument("--config", metavar="PATH", help="config file instead of a preset")
    bounds_p.set_defaults(func=cmd_bounds)

    sc_p = sub.add_parser("scenarios", help="list the packaged scenarios")
    sc_p.add_argument("--name", metavar="NAME", help="show a single scenario")
    sc_p.set_defaults(func=cmd_scenarios)
    return parser


# -- shared resolution --------------------------------------------------------------


def _scenario_source(args) -> tuple[str, ExperimentConfig]:
    """Resolve the preset-or-config choice into a labeled ExperimentConfig."""
    if (args.preset is None) == (args.config is None):
        raise ValueError("name exactly one scenario: a preset name or --config PATH")
    if args.preset is not None:
        preset = get_preset(args.preset)
        return preset.name, preset.experiment()
    return f"config {args.config}", parse_config(args.config)


def _pick_policies(
    roster: tuple[PolicyConfig, ...], names_arg: str
) -> tuple[PolicyConfig, ...]:
    names = [name.strip() for name in names_arg.split(",") if name.strip()]
    if not names:
        raise ValueError("--policies must name at least one policy")
    by_label = {policy.display_label: policy for policy in roster}
    missing = [name for name in names if name not in by_label]
    if missing:
        raise ValueError(
            f"policies not in the scenario's roster: {', '.join(missing)}; "
            f"available: {', '.join(by_label)}"
        )
    return tuple(by_label[name] for name in names)


# -- run ----------------------------------------------------------------------------


def cmd_run(args) -> int:
    label, config = _scenario_source(args)
    horizon = config.horizon
    trajectories = config.trajectories
    if args.desk_scale:
        horizon, trajectories = DESK_HORIZON, DESK_TRAJECTORIES
    if args.horizon is not None:
        horizon = args.horizon
    if args.trajectories is not None:
        trajectories = args.trajectories
    config = replace(
        config,
        horizon=horizon,
        trajectories=trajectories,
        base_seed=args.seed if args.seed is not None else config.base_seed,
        policies=config.policies
        if args.policies is None
        else _pick_policies(config.policies, args.policies),
    )
    traces = run_experiment(config, workers=args.workers)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as out:
            _write_csv(out, label, config, traces)
    else:
        _write_csv(sys.stdout, label, config, traces)
    return 0


def _short(x: float) -> str:
    """Shortest faithful form for parameter echoes: 3 not 3.0, 0.1 not 0.10..01."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _law_echo(law: ClientCountLaw) -> str:
    if law.kind == "constant":
        return f"constant({_short(law.value)})"
    return f"shifted-poisson({_short(law.value)})"


def _arm_echo(index: int, spec: ArmSpec) -> str:
    family = spec.dist.family
    parts = [f"# arm {index} family={family.kind}"]
    if family.kind == "gaussian":
        parts.append(f"variance={_short(family.variance)}")
    parts.append(f"mean={_short(spec.dist.mean)}")
    parts.append(f"threshold={_short(spec.threshold)}")
    parts.append(f"clients={_law_echo(spec.clients)}")
    return " ".join(parts)


def _policy_echo(policy: PolicyConfig) -> str:
    parts = [f"# policy {policy.display_label}"]
    if policy.kind not in ("ts", "oracle"):
        parts.append(f"c={_short(policy.exploration_c)}")
    if policy.reward_bound is not None:
        parts.append(f"bound={_short(policy.reward_bound)}")
    if policy.kind in ("bayes-ucb", "ts"):
        parts.append(f"prior={policy.prior_kind}")
    return " ".join(parts)


def _write_csv(
    out: TextIO, label: str, config: ExperimentConfig, traces: list[RegretTrace]
) -> None:
    put = out.write
    put(f"# profitbandit {__version__} regret traces\n")
    put(f"# generator {STREAM_ALGORITHM}\n")
    put(f"# scenario {label}\n")
    for index, spec in enumerate(config.specs):
        put(_arm_echo(index, spec) + "\n")
    for policy in config.policies:
        put(_policy_echo(policy) + "\n")
    grid = config.grid
    grid_echo = grid.kind if grid.points is None else f"{grid.kind}({grid.points})"
    put(
        f"# run horizon={config.horizon} trajectories={config.trajectories} "
        f"seed={config.base_seed} grid={grid_echo}\n"
    )
    try:
        report = bound_report(config.specs)
        put(
            f"# bound-slopes lower={report.lower_slope:.17g} "
            f"upper={report.upper_slope:.17g}\n"
        )
    except DomainError as exc:
        put(f"# bound-slopes undefined: {exc}\n")
    put("policy,t,mean_regret,stderr\n")
    for trace in sorted(traces, key=lambda tr: tr.label):
        if "," in trace.label or "\n" in trace.label:
            raise DomainError(f"policy label {trace.label!r} cannot appear in CSV")
        for t, mean, err in zip(trace.times, trace.mean_regret, trace.stderr):
            put(f"{trace.label},{t},{mean:.17g},{err:.17g}\n")


# -- bounds -------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    label, config = _scenario_source(args)
    specs = config.specs
    report = bound_report(specs)
    profitable = sum(1 for spec in specs if spec.profitable)
    print(f"scenario {label} ({len(specs)} arms, {profitable} profitable)")
    if report.arms:
        header = ["arm", "mean", "threshold", "gap", "kinf", "pulls/logT", "lower", "upper"]
        rows = [header]
        for entry in report.arms:
            spec = specs[entry.arm]
            rows.append(
                [
                    str(entry.arm),
                    _short(spec.dist.mean),
                    _short(spec.threshold),
                    _short(entry.gap),
                    f"{entry.kinf:.17g}",
                    f"{entry.pull_rate_lower:.17g}",
                    f"{entry.lower_contribution:.17g}",
                    f"{entry.upper_contribution:.17g}",
                ]
            )
        widths = [max(len(row[col]) for row in rows) for col in range(len(header))]
        for row in rows:
            print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    else:
        print("all arms profitable; no asymptotic regret accrues")
    print(f"lower slope {report.lower_slope:.17g}")
    print(f"upper slope {report.upper_slope:.17g}")
    return 0


# -- scenarios ----------------------------------------------------------------------


def cmd_scenarios(args) -> int:
    if args.name is not None:
        names = [get_preset(args.name).name]
    else:
        names = list(PRESETS)
    for position, name in enumerate(names):
        if position:
            print()
        preset = PRESETS[name]
        specs = preset.specs
        families = sorted({spec.dist.family.kind for spec in specs})
        bounds = sorted(
            {
                policy.reward_bound
                for policy in preset.policies
                if policy.reward_bound is not None
            }
        )
        print(f"{preset.name}: {preset.summary}")
        print(f"  family        {', '.join(families)}")
        print(f"  means         {', '.join(_short(s.dist.mean) for s in specs)}")
        print(f"  thresholds    {', '.join(_short(s.threshold) for s in specs)}")
        print(f"  client rates  {', '.join(_short(s.clients.value) for s in specs)}"
              " (shifted Poisson)")
        print(f"  policies      {', '.join(p.display_label for p in preset.policies)}")
        if bounds:
            print(f"  reward bound  {', '.join(_short(b) for b in bounds)}"
                  " (bounded-reward policies)")
        print(
            f"  defaults      horizon {preset.horizon}, trajectories "
            f"{preset.trajectories} (desk scale: {DESK_HORIZON}, {DESK_TRAJECTORIES})"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
