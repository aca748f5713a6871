"""Monte Carlo harness: regret traces averaged over many trajectories.

Reproducibility contract
------------------------

Each (policy, trajectory) cell owns one random stream seeded by
:func:`derive_seed`.  Within a round the stream is consumed in a fixed
order: client counts for every arm in ascending arm order, then rewards
for each selected arm in ascending order, then whatever randomness the
policy's selection rule needs (only Thompson sampling draws any).  Round
one selects every arm — except under the oracle, which plays its fixed
target set from the start; the selection computed after round ``t`` is
played at round ``t + 1``; nothing is selected after the final round.

Aggregation is a deterministic blocked reduction: trajectories are
grouped into fixed blocks of 64 by trajectory index, each block's sum
and sum-of-squares accumulate in index order, and block partials combine
in block order.  Workers only decide *where* a block is computed, never
the arithmetic order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .environment import ArmSpec, PreparedArm, prepare, step
from .families import DomainError
from .policies import PolicyConfig, make_policy
from .randomness import Stream, derive_seed

BLOCK = 64  # trajectories per reduction block (fixed: part of the output contract)

GRID_KINDS = ("every-step", "log-spaced")


@dataclass(frozen=True)
class RecordGrid:
    """Which rounds get a cumulative-regret sample in the output."""

    kind: str
    points: int | None = None

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise DomainError(
                f"unknown record grid kind {self.kind!r}; expected one of {GRID_KINDS}"
            )
        if self.kind == "log-spaced":
            if self.points is None or self.points < 2:
                raise DomainError("log-spaced grids need at least 2 points")
        elif self.points is not None:
            raise DomainError("every-step grids take no point count")

    def times(self, horizon: int) -> list[int]:
        """Recorded rounds, ascending, always ending at the horizon."""
        if self.kind == "every-step":
            return list(range(1, horizon + 1))
        raw = np.geomspace(1.0, float(horizon), num=self.points)
        ts = sorted(set(int(round(x)) for x in raw))
        ts[0], ts[-1] = 1, horizon
        return sorted(set(ts))


def every_step() -> RecordGrid:
    return RecordGrid("every-step")


def log_spaced(points: int) -> RecordGrid:
    return RecordGrid("log-spaced", points)


def default_grid(horizon: int) -> RecordGrid:
    """Every round up to 10^4 rounds, 200 log-spaced points beyond."""
    return every_step() if horizon <= 10_000 else log_spaced(200)


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment: scenario, policy roster, horizon, averaging."""

    specs: tuple[ArmSpec, ...]
    policies: tuple[PolicyConfig, ...]
    horizon: int
    trajectories: int
    base_seed: int
    record_grid: RecordGrid | None = None

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "policies", tuple(self.policies))
        if not self.specs:
            raise DomainError("an experiment needs at least one arm")
        if not self.policies:
            raise DomainError("an experiment needs at least one policy")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if self.trajectories < 1:
            raise DomainError(f"trajectories must be >= 1, got {self.trajectories}")
        labels = [p.display_label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise DomainError(f"policy labels must be distinct, got {labels}")

    @property
    def grid(self) -> RecordGrid:
        return self.record_grid if self.record_grid is not None else default_grid(self.horizon)


@dataclass
class RegretTrace:
    """Averaged cumulative pseudo-regret for one policy."""

    label: str
    times: list[int]
    mean_regret: list[float]
    stderr: list[float]
    trajectories: int


def run_trajectory(
    config: ExperimentConfig,
    policy: PolicyConfig,
    trajectory_index: int,
    seed: int,
    prepared: list[PreparedArm] | None = None,
) -> np.ndarray:
    """Cumulative pseudo-regret at the recorded rounds of one trajectory.

    Fully determined by (config, policy, seed); ``trajectory_index`` is
    accepted for symmetry with the seed derivation and diagnostics.
    ``prepared`` may share compiled arms across trajectories — the
    compiled samplers are deterministic, so sharing never changes output.
    """
    del trajectory_index  # the seed fully encodes the cell identity
    if prepared is None:
        prepared = prepare(config.specs)
    engine = make_policy(policy, config.specs)
    stream = Stream(seed)
    times = config.grid.times(config.horizon)
    out = np.empty(len(times))
    rec = 0
    next_time = times[0]
    k = len(config.specs)
    mask = engine.initial_mask  # every arm, except for the oracle: the true set
    cum = 0.0
    horizon = config.horizon
    observe = engine.observe
    select = engine.select
    for t in range(1, horizon + 1):
        outcome = step(prepared, mask, stream)
        rewards = outcome.rewards
        for a in range(k):
            if rewards[a] is not None:
                observe(a, rewards[a])
        cum += outcome.regret_increment
        if t == next_time:
            out[rec] = cum
            rec += 1
            next_time = times[rec] if rec < len(times) else 0
        if t < horizon:
            mask = select(t, stream)
    return out


def _block_partial(args) -> tuple[int, int, np.ndarray, np.ndarray]:
    """Sum and sum-of-squares over one fixed block of trajectories."""
    config, policy_index, start, stop = args
    policy = config.policies[policy_index]
    prepared = prepare(config.specs)
    width = len(config.grid.times(config.horizon))
    total = np.zeros(width)
    total_sq = np.zeros(width)
    for j in range(start, stop):
        seed = derive_seed(config.base_seed, policy_index, j)
        values = run_trajectory(config, policy, j, seed, prepared=prepared)
        total += values
        total_sq += values * values
    return policy_index, start, total, total_sq


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[RegretTrace]:
    """Traces for every policy, bit-identical for any ``workers`` count."""
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    tasks = []
    for p in range(len(config.policies)):
        for start in range(0, config.trajectories, BLOCK):
            stop = min(start + BLOCK, config.trajectories)
            tasks.append((config, p, start, stop))
    if workers == 1 or len(tasks) == 1:
        results = [_block_partial(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_block_partial, tasks, chunksize=1))
    # combine partials in fixed (policy, block-start) order
    width = len(config.grid.times(config.horizon))
    sums = [np.zeros(width) for _ in config.policies]
    sums_sq = [np.zeros(width) for _ in config.policies]
    for policy_index, _start, total, total_sq in sorted(
        results, key=lambda r: (r[0], r[1])
    ):
        sums[policy_index] += total
        sums_sq[policy_index] += total_sq
    n = config.trajectories
    times = config.grid.times(config.horizon)
    traces = []
    for p, policy in enumerate(config.policies):
        mean = sums[p] / n
        if n > 1:
            var = (sums_sq[p] - sums[p] * sums[p] / n) / (n - 1)
            stderr = np.sqrt(np.maximum(var, 0.0) / n)
        else:
            stderr = np.zeros(width)
        traces.append(
            RegretTrace(
                label=policy.display_label,
                times=list(times),
                mean_regret=[float(x) for x in mean],
                stderr=[float(x) for x in stderr],
                trajectories=n,
            )
        )
    return traces
