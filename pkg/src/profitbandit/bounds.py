"""Asymptotic regret-slope certificates for a scenario.

Any policy that keeps adapting must keep trying every non-profitable arm
at a logarithmic rate: the expected number of observations of an arm
whose mean sits below its threshold grows at least like log(T) / kinf,
where ``kinf`` is the smallest divergence between the arm's reward law
and any law of the same family whose mean clears the threshold.  Within
a one-parameter exponential family that infimum is simply
``divergence(mean, threshold)``: the map y -> d(mean, y) is continuous
and increasing above the mean, so pushing the alternative mean down onto
the threshold attains it.

:func:`bound_report` turns this into a pair of regret slopes (regret per
log T, asymptotically).  Selecting a non-profitable arm forgoes |gap|
per client, so the lower slope adds |gap| / kinf per arm.  The matching
upper slope for the index policies scales each term by
(mean client count) / (fewest clients per round): a selection round
costs |gap| times the mean count, while the observations that shrink the
index accrue at least the minimum count per round.  Constant client laws
make that ratio exactly one, collapsing the two totals onto each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .environment import ArmSpec
from .families import DomainError, Family

__all__ = ["ArmBound", "BoundReport", "kinf", "bound_report"]


def kinf(family: Family, mean: float, threshold: float) -> float:
    """Smallest divergence from ``mean`` to any mean clearing ``threshold``.

    Defined for non-profitable arms only (``mean < threshold``).  Returns
    ``family.divergence(mean, threshold)``, which is ``inf`` when the
    threshold sits on the boundary of the mean range (no law of the
    family can clear it).
    """
    if not mean < threshold:
        raise DomainError(
            "kinf is defined for non-profitable arms (mean < threshold); "
            f"got mean {mean!r} against threshold {threshold!r}"
        )
    return family.divergence(mean, threshold)


@dataclass(frozen=True)
class ArmBound:
    """Slope contributions of one non-profitable arm."""

    arm: int
    gap: float  # mean - threshold, negative for these arms
    kinf: float  # nats separating the arm's law from profitability
    pull_rate_lower: float  # 1 / kinf: fewest selections per log(T)
    lower_contribution: float  # |gap| / kinf
    upper_contribution: float  # (mean clients / fewest clients) * |gap| / kinf


@dataclass(frozen=True)
class BoundReport:
    """Per-arm slope contributions plus the scenario totals."""

    arms: tuple[ArmBound, ...]
    lower_slope: float
    upper_slope: float


def bound_report(specs: Sequence[ArmSpec]) -> BoundReport:
    """Regret-slope certificates for a scenario, one entry per losing arm.

    Profitable arms cost nothing in the long run and are omitted.  An arm
    whose mean equals its threshold has no defined slope (the divergence
    vanishes together with the per-round price) and is rejected by name.
    """
    entries = []
    for arm, spec in enumerate(specs):
        gap = spec.delta
        if gap == 0.0:
            raise DomainError(
                f"arm {arm} has mean equal to its threshold; "
                "its regret slope is undefined"
            )
        if gap > 0.0:
            continue
        div = kinf(spec.dist.family, spec.dist.mean, spec.threshold)
        if div == 0.0:
            raise DomainError(
                f"arm {arm} sits too close to its threshold to resolve "
                "a slope (the divergence underflowed to zero)"
            )
        lower = -gap / div
        # the upper term is the ratio times the lower term, so equal mean
        # and minimum client counts reproduce the lower term bit for bit
        ratio = spec.clients.mean / spec.clients.minimum
        entries.append(
            ArmBound(
                arm=arm,
                gap=gap,
                kinf=div,
                pull_rate_lower=1.0 / div,
                lower_contribution=lower,
                upper_contribution=ratio * lower,
            )
        )
    return BoundReport(
        arms=tuple(entries),
        lower_slope=math.fsum(e.lower_contribution for e in entries),
        upper_slope=math.fsum(e.upper_contribution for e in entries),
    )
