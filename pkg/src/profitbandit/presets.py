"""Packaged benchmark scenarios.

Three ready-to-run scenarios, each five arms served by shifted-Poisson
client batches with rates 3..7:

``bernoulli``
    Success probabilities (0.1, 0.3, 0.5, 0.5, 0.7) against thresholds
    (0.2, 0.2, 0.4, 0.6, 0.8): two profitable arms, two arms sharing a
    mean but split by their thresholds, every gap exactly 0.1.  Runs the
    full eight-policy roster; bounded-reward policies use bound 1.
``poisson``
    Count rewards with means (1, 2, 3, 4, 5) against thresholds
    (2, 1, 4, 3, 6), gaps of a whole unit either way.  Same roster with
    reward bound 100 for the bounded-reward policies.
``poisson-sharp``
    The same count arms squeezed by thresholds (1.1, 1.9, 3.1, 3.9,
    5.1), every gap 0.1 — a much harder instance, so only the
    family-aware policies (the distribution-matched index, its
    zero-overhead variant, the quantile rule, and posterior sampling)
    plus the oracle run by default.

Full-scale defaults are horizon 10000 with 10000 trajectories; desk
scale (horizon 5000, 1000 trajectories) finishes in minutes instead of
hours while showing the same qualitative regret ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .environment import ArmSpec, shifted_poisson_clients
from .families import BERNOULLI, POISSON, Distribution
from .policies import PolicyConfig
from .simulate import ExperimentConfig, RecordGrid

__all__ = [
    "DESK_HORIZON",
    "DESK_TRAJECTORIES",
    "DEFAULT_SEED",
    "PRESETS",
    "ScenarioPreset",
    "get_preset",
]

FULL_HORIZON = 10_000
FULL_TRAJECTORIES = 10_000
DESK_HORIZON = 5_000
DESK_TRAJECTORIES = 1_000
DEFAULT_SEED = 1

_CLIENT_RATES = (3.0, 4.0, 5.0, 6.0, 7.0)


@dataclass(frozen=True)
class ScenarioPreset:
    """A named scenario with its default policy roster and run sizes."""

    name: str
    summary: str
    specs: tuple[ArmSpec, ...]
    policies: tuple[PolicyConfig, ...]
    horizon: int = FULL_HORIZON
    trajectories: int = FULL_TRAJECTORIES

    def experiment(
        self,
        *,
        horizon: int | None = None,
        trajectories: int | None = None,
        base_seed: int | None = None,
        desk_scale: bool = False,
        policies: Sequence[PolicyConfig] | None = None,
        record_grid: RecordGrid | None = None,
    ) -> ExperimentConfig:
        """Experiment built from the preset, with optional overrides.

        ``desk_scale`` swaps the full-scale run sizes for the desk ones;
        explicit ``horizon``/``trajectories`` win over both.
        """
        h = self.horizon
        n = self.trajectories
        if desk_scale:
            h, n = DESK_HORIZON, DESK_TRAJECTORIES
        if horizon is not None:
            h = horizon
        if trajectories is not None:
            n = trajectories
        return ExperimentConfig(
            specs=self.specs,
            policies=self.policies if policies is None else tuple(policies),
            horizon=h,
            trajectories=n,
            base_seed=DEFAULT_SEED if base_seed is None else base_seed,
            record_grid=record_grid,
        )


def _full_roster(bound: float) -> tuple[PolicyConfig, ...]:
    return (
        PolicyConfig(kind="kl-ucb"),
        PolicyConfig(kind="kl-ucb-plus"),
        PolicyConfig(kind="kl-bernoulli-ucb", reward_bound=bound),
        PolicyConfig(kind="kl-gaussian-ucb", reward_bound=bound),
        PolicyConfig(kind="bayes-ucb"),
        PolicyConfig(kind="ts"),
        PolicyConfig(kind="emp-kl-ucb", reward_bound=bound),
        PolicyConfig(kind="oracle"),
    )


_FAMILY_AWARE_ROSTER = (
    PolicyConfig(kind="kl-ucb"),
    PolicyConfig(kind="kl-ucb-plus"),
    PolicyConfig(kind="bayes-ucb"),
    PolicyConfig(kind="ts"),
    PolicyConfig(kind="oracle"),
)


def _arms(family, means, thresholds) -> tuple[ArmSpec, ...]:
    return tuple(
        ArmSpec(Distribution(family, m), tau, shifted_poisson_clients(rate))
        for m, tau, rate in zip(means, thresholds, _CLIENT_RATES, strict=True)
    )


PRESETS: dict[str, ScenarioPreset] = {
    preset.name: preset
    for preset in (
        ScenarioPreset(
            name="bernoulli",
            summary="five Bernoulli arms, all gaps 0.1, full policy roster",
            specs=_arms(
                BERNOULLI,
                (0.1, 0.3, 0.5, 0.5, 0.7),
                (0.2, 0.2, 0.4, 0.6, 0.8),
            ),
            policies=_full_roster(bound=1.0),
        ),
        ScenarioPreset(
            name="poisson",
            summary="five Poisson arms, whole-unit gaps, full policy roster",
            specs=_arms(
                POISSON,
                (1.0, 2.0, 3.0, 4.0, 5.0),
                (2.0, 1.0, 4.0, 3.0, 6.0),
            ),
            policies=_full_roster(bound=100.0),
        ),
        ScenarioPreset(
            name="poisson-sharp",
            summary="the same Poisson arms with gaps squeezed to 0.1, "
            "family-aware policies only",
            specs=_arms(
                POISSON,
                (1.0, 2.0, 3.0, 4.0, 5.0),
                (1.1, 1.9, 3.1, 3.9, 5.1),
            ),
            policies=_FAMILY_AWARE_ROSTER,
        ),
    )
}


def get_preset(name: str) -> ScenarioPreset:
    """Look up a packaged scenario by name."""
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(PRESETS)
        raise ValueError(f"unknown scenario preset {name!r}; known: {known}") from None
