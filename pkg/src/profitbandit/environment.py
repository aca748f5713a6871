"""Generative model for threshold-profitability bandits.

Each arm has a reward distribution, a profitability threshold in reward
units, and a law for the number of clients it serves per round.  One
round of play, given the selected subset, is :func:`step`:

1. every arm's client count is drawn, in ascending arm order (foregone
   clients exist whether or not the arm is served, and the foregone
   profit of unselected arms needs their realized counts);
2. each *selected* arm, again in ascending order, draws count-many
   i.i.d. rewards;
3. the pseudo-regret increment is accumulated from the true gaps:
   ``gap * count`` for profitable arms left unselected plus
   ``|gap| * count`` for non-profitable arms selected.

That draw order — counts for all arms, then rewards arm by arm — is the
reproducibility contract for a round; policy randomness (if any) comes
afterwards, in the simulation loop.

Arms are compiled by :func:`prepare` into closures that draw counts and
reward batches with exactly the same stream consumption as the scalar
``ClientCountLaw.draw`` / ``Distribution.sample`` calls, so trajectories
are bit-identical whichever path produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .families import BERNOULLI, DomainError, Distribution
from .randomness import PoissonTable, Stream

COUNT_KINDS = ("constant", "shifted-poisson")


@dataclass(frozen=True)
class ClientCountLaw:
    """Distribution of the per-round number of clients at one arm.

    ``constant`` serves exactly ``value`` clients (an integer >= 1);
    ``shifted-poisson`` serves ``1 + Poisson(value)`` clients, so counts
    are always >= 1.
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in COUNT_KINDS:
            raise DomainError(
                f"unknown client-count kind {self.kind!r}; expected one of {COUNT_KINDS}"
            )
        if self.kind == "constant":
            if self.value != int(self.value) or self.value < 1:
                raise DomainError(
                    f"constant client count must be an integer >= 1, got {self.value}"
                )
        else:
            if not (self.value >= 0.0 and math.isfinite(self.value)):
                raise DomainError(
                    f"shifted-poisson rate must be finite and >= 0, got {self.value}"
                )

    @property
    def minimum(self) -> int:
        """Smallest possible count (the c^- of bound formulas)."""
        return int(self.value) if self.kind == "constant" else 1

    @property
    def mean(self) -> float:
        """Expected count (the c~^+ of bound formulas)."""
        return float(self.value) if self.kind == "constant" else 1.0 + self.value

    def draw(self, stream: Stream) -> int:
        """One client count; the constant law consumes no randomness."""
        if self.kind == "constant":
            return int(self.value)
        return 1 + stream.poisson(self.value)


def constant_clients(k: int) -> ClientCountLaw:
    return ClientCountLaw("constant", k)


def shifted_poisson_clients(rate: float) -> ClientCountLaw:
    return ClientCountLaw("shifted-poisson", rate)


@dataclass(frozen=True)
class ArmSpec:
    """One arm: reward distribution, profitability threshold, client law."""

    dist: Distribution
    threshold: float
    clients: ClientCountLaw

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise DomainError(f"threshold must be finite, got {self.threshold}")
        lo, hi = self.dist.family.mean_range()
        if not (lo <= self.threshold <= hi):
            raise DomainError(
                f"threshold {self.threshold} outside the closed mean range "
                f"[{lo}, {hi}] of the {self.dist.family.kind} family"
            )

    @property
    def delta(self) -> float:
        """True expected profit per client, mean minus threshold."""
        return self.dist.mean - self.threshold

    @property
    def profitable(self) -> bool:
        return self.delta > 0.0


class StepOutcome(NamedTuple):
    """One round: counts for every arm, rewards only for selected arms."""

    counts: list[int]
    rewards: list[list[float] | None]
    regret_increment: float


class PreparedArm(NamedTuple):
    """An arm compiled for the simulation loop."""

    spec: ArmSpec
    delta: float
    profitable: bool
    draw_count: Callable[[Stream], int]
    draw_rewards: Callable[[Stream, int], list[float]]


def _count_sampler(law: ClientCountLaw) -> Callable[[Stream], int]:
    if law.kind == "constant":
        k = int(law.value)
        return lambda stream: k
    table = PoissonTable(law.value)
    draw = table.draw
    return lambda stream: 1 + draw(stream)


def _reward_sampler(dist: Distribution) -> Callable[[Stream, int], list[float]]:
    kind = dist.family.kind
    mean = dist.mean
    if kind == "bernoulli":
        def draw(stream: Stream, n: int) -> list[float]:
            return [1.0 if u < mean else 0.0 for u in stream.uniforms(n)]
    elif kind == "poisson":
        table = PoissonTable(mean)
        table_draw = table.draw
        def draw(stream: Stream, n: int) -> list[float]:
            return [float(table_draw(stream)) for _ in range(n)]
    elif kind == "exponential":
        def draw(stream: Stream, n: int) -> list[float]:
            return [stream.exponential(mean) for _ in range(n)]
    else:
        sd = math.sqrt(dist.family.variance)
        def draw(stream: Stream, n: int) -> list[float]:
            return [mean + sd * stream.normal() for _ in range(n)]
    return draw


def prepare(specs) -> list[PreparedArm]:
    """Compile arm specs into fast, stream-identical samplers."""
    return [
        PreparedArm(
            spec=spec,
            delta=spec.delta,
            profitable=spec.delta > 0.0,
            draw_count=_count_sampler(spec.clients),
            draw_rewards=_reward_sampler(spec.dist),
        )
        for spec in specs
    ]


def selection_mask(selected, k: int) -> int:
    """Normalize a subset (bitmask or iterable of arm indices) to a bitmask."""
    if isinstance(selected, int):
        if not 0 <= selected < (1 << k):
            raise ValueError(f"selection bitmask {selected:#x} out of range for {k} arms")
        return selected
    mask = 0
    for a in selected:
        if not 0 <= a < k:
            raise ValueError(f"arm index {a} out of range for {k} arms")
        mask |= 1 << a
    return mask


def step(prepared: list[PreparedArm], selected, stream: Stream) -> StepOutcome:
    """Play one round with the given selected subset (see module docstring)."""
    k = len(prepared)
    mask = selection_mask(selected, k)
    counts = [arm.draw_count(stream) for arm in prepared]
    rewards: list[list[float] | None] = [None] * k
    regret = 0.0
    for a in range(k):
        arm = prepared[a]
        c = counts[a]
        if (mask >> a) & 1:
            rewards[a] = arm.draw_rewards(stream, c)
            if not arm.profitable:
                regret -= arm.delta * c
        elif arm.profitable:
            regret += arm.delta * c
    return StepOutcome(counts, rewards, regret)


def credit_scenario(
    success_probs, interest_rates, loan_amounts, clients
) -> tuple[list[ArmSpec], list[float]]:
    """Reduce a credit-granting scenario to Bernoulli profitability arms.

    Arm ``a`` of the raw scenario pays ``(1 + rate_a) * loan_a`` per
    repaid loan (repayment is Bernoulli with probability ``prob_a``) and
    costs ``loan_a`` per granted loan.  Dividing rewards and threshold
    by ``(1 + rate_a) * loan_a`` yields a Bernoulli arm with mean
    ``prob_a`` and threshold ``1 / (1 + rate_a)``: the arm is profitable
    exactly when ``prob_a`` clears that threshold.  Returns the reduced
    arms plus the per-arm reward scale ``(1 + rate_a) * loan_a`` that
    maps reduced-unit regret back into money.
    """
    if not (
        len(success_probs) == len(interest_rates) == len(loan_amounts) == len(clients)
    ):
        raise DomainError(
            "success_probs, interest_rates, loan_amounts, and clients must align"
        )
    specs = []
    scales = []
    for p, rate, loan, law in zip(success_probs, interest_rates, loan_amounts, clients):
        if not 0.0 < p < 1.0:
            raise DomainError(f"repayment probability must be in (0, 1), got {p}")
        if not (rate > -1.0 and math.isfinite(rate)):
            raise DomainError(f"interest rate must exceed -1, got {rate}")
        if not (loan > 0.0 and math.isfinite(loan)):
            raise DomainError(f"loan amount must be positive, got {loan}")
        specs.append(
            ArmSpec(
                dist=Distribution(BERNOULLI, p),
                threshold=1.0 / (1.0 + rate),
                clients=law,
            )
        )
        scales.append((1.0 + rate) * loan)
    return specs, scales
