"""Conjugate posteriors over arm means.

Each reward family carries a conjugate prior family; the posterior state
stores the current hyperparameters together with the observation count
and reward sum.  Hyperparameter meaning per family:

- Bernoulli:    Beta(a, b) on the mean.
- Poisson:      Gamma(shape=a, rate=b) on the mean.
- Exponential:  Gamma(shape=a, rate=b) on the *rate*; the induced law on
  the mean is the reciprocal.  Quantiles and CDFs are reported in mean
  space throughout.
- Gaussian (known variance): Normal(location=a, variance=b) on the mean;
  the flat prior is encoded as b = inf.

Default priors are Jeffreys': Beta(1/2, 1/2), Gamma(1/2, 0), Gamma(0, 0),
and the flat prior respectively.  The "uniform" kind is the flat density
on the conjugate parameter (Beta(1, 1), Gamma(1, 0), Gamma(1, 0), flat).
Improper states (Gamma with a zero parameter, flat Normal) refuse
quantile/cdf/sampling with :class:`ImproperPosteriorError` rather than
silently regularizing; one forced exploration pull always makes the
Jeffreys and uniform states proper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc, betaincinv, gammainc, gammaincinv, ndtr, ndtri

from .families import DomainError, Family
from .randomness import Stream

PRIOR_KINDS = ("jeffreys", "uniform", "custom")


class ImproperPosteriorError(RuntimeError):
    """Raised when querying an improper posterior state."""


@dataclass(frozen=True)
class PosteriorState:
    """Conjugate posterior hyperparameters plus sufficient statistics."""

    family: Family
    a: float
    b: float
    n: int = 0
    total: float = 0.0

    @property
    def proper(self) -> bool:
        if self.family.kind == "gaussian":
            return math.isfinite(self.b)
        return self.a > 0.0 and self.b > 0.0

    def _require_proper(self, op: str) -> None:
        if not self.proper:
            raise ImproperPosteriorError(
                f"improper {self.family.kind} posterior after {self.n} observations; "
                f"force an initial exploration pull before calling {op}"
            )


def prior(
    family: Family,
    kind: str = "jeffreys",
    hyper: tuple[float, float] | None = None,
) -> PosteriorState:
    """Initial posterior state of the given prior kind."""
    if kind not in PRIOR_KINDS:
        raise DomainError(f"unknown prior kind {kind!r}; expected one of {PRIOR_KINDS}")
    if kind == "custom":
        if hyper is None:
            raise DomainError("custom prior requires explicit hyperparameters")
        a0, b0 = float(hyper[0]), float(hyper[1])
        if family.kind == "gaussian":
            if not math.isfinite(a0):
                raise DomainError("gaussian prior location must be finite")
            if not b0 > 0.0:
                raise DomainError("gaussian prior variance must be positive")
        elif a0 < 0.0 or b0 < 0.0:
            raise DomainError(
                f"prior hyperparameters must be nonnegative, got ({a0}, {b0})"
            )
        return PosteriorState(family, a0, b0)
    if hyper is not None:
        raise DomainError(f"{kind} prior takes no hyperparameters")
    if family.kind == "bernoulli":
        return PosteriorState(family, 0.5, 0.5) if kind == "jeffreys" else PosteriorState(family, 1.0, 1.0)
    if family.kind == "poisson":
        return PosteriorState(family, 0.5 if kind == "jeffreys" else 1.0, 0.0)
    if family.kind == "exponential":
        return PosteriorState(family, 0.0 if kind == "jeffreys" else 1.0, 0.0)
    # gaussian: both jeffreys and uniform are the flat improper prior
    return PosteriorState(family, 0.0, math.inf)


def update(state: PosteriorState, x: float) -> PosteriorState:
    """Posterior state after observing one reward ``x``."""
    family = state.family
    if not family.in_support(x):
        raise DomainError(f"{x!r} is not a possible {family.kind} reward")
    n, total = state.n + 1, state.total + x
    if family.kind == "bernoulli":
        return replace(state, a=state.a + x, b=state.b + (1.0 - x), n=n, total=total)
    if family.kind == "poisson":
        return replace(state, a=state.a + x, b=state.b + 1.0, n=n, total=total)
    if family.kind == "exponential":
        return replace(state, a=state.a + 1.0, b=state.b + x, n=n, total=total)
    # gaussian with known variance: precision-weighted location update
    sigma2 = family.variance
    inv = (0.0 if math.isinf(state.b) else 1.0 / state.b) + 1.0 / sigma2
    b = 1.0 / inv
    a = b * ((0.0 if math.isinf(state.b) else state.a / state.b) + x / sigma2)
    return replace(state, a=a, b=b, n=n, total=total)


def from_counts(prior_state: PosteriorState, n: int, total: float) -> PosteriorState:
    """Closed-form posterior after ``n`` observations summing to ``total``.

    Equivalent to folding :func:`update` over the observations (posteriors
    here depend on the data only through the count and the sum).
    """
    if n < 0:
        raise DomainError("observation count must be nonnegative")
    if n == 0:
        return prior_state
    family = prior_state.family
    if family.kind == "bernoulli":
        return replace(
            prior_state, a=prior_state.a + total, b=prior_state.b + (n - total), n=n, total=total
        )
    if family.kind == "poisson":
        return replace(prior_state, a=prior_state.a + total, b=prior_state.b + n, n=n, total=total)
    if family.kind == "exponential":
        return replace(prior_state, a=prior_state.a + n, b=prior_state.b + total, n=n, total=total)
    sigma2 = family.variance
    prior_prec = 0.0 if math.isinf(prior_state.b) else 1.0 / prior_state.b
    prior_loc_term = 0.0 if math.isinf(prior_state.b) else prior_state.a / prior_state.b
    b = 1.0 / (prior_prec + n / sigma2)
    a = b * (prior_loc_term + total / sigma2)
    return replace(prior_state, a=a, b=b, n=n, total=total)


def cdf(state: PosteriorState, x: float) -> float:
    """Posterior CDF of the arm mean at ``x``."""
    state._require_proper("cdf")
    if math.isnan(x):
        raise DomainError("cdf argument must not be NaN")
    kind = state.family.kind
    if kind == "bernoulli":
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return float(betainc(state.a, state.b, x))
    if kind == "poisson":
        if x <= 0.0:
            return 0.0
        return float(gammainc(state.a, state.b * x))
    if kind == "exponential":
        # mean = 1/rate with rate ~ Gamma(a, b):  P(mean <= x) = P(rate >= 1/x)
        if x <= 0.0:
            return 0.0
        return float(1.0 - gammainc(state.a, state.b / x))
    return float(ndtr((x - state.a) / math.sqrt(state.b)))


def quantile(state: PosteriorState, level: float) -> float:
    """Mean-space posterior quantile at ``level`` in (0, 1)."""
    state._require_proper("quantile")
    if not 0.0 < level < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {level!r}")
    kind = state.family.kind
    if kind == "bernoulli":
        return float(betaincinv(state.a, state.b, level))
    if kind == "poisson":
        return float(gammaincinv(state.a, level) / state.b)
    if kind == "exponential":
        # monotone-decreasing map mean = 1/rate flips the level
        return float(state.b / gammaincinv(state.a, 1.0 - level))
    return state.a + math.sqrt(state.b) * float(ndtri(level))


def sample_mean(state: PosteriorState, stream: Stream) -> float:
    """One posterior draw of the arm mean (Thompson sampling primitive)."""
    state._require_proper("sample_mean")
    kind = state.family.kind
    if kind == "bernoulli":
        return stream.beta(state.a, state.b)
    if kind == "poisson":
        return stream.gamma(state.a) / state.b
    if kind == "exponential":
        return state.b / stream.gamma(state.a)
    return state.a + math.sqrt(state.b) * stream.normal()


def sample_mean_many(state: PosteriorState, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized posterior mean draws for Monte-Carlo checks.

    Distribution-identical to repeated :func:`sample_mean` calls but uses
    numpy's vectorized samplers, so it does not reproduce the scalar
    stream draw-for-draw.
    """
    state._require_proper("sample_mean_many")
    kind = state.family.kind
    if kind == "bernoulli":
        return rng.beta(state.a, state.b, size)
    if kind == "poisson":
        return rng.gamma(state.a, 1.0 / state.b, size)
    if kind == "exponential":
        return state.b / rng.gamma(state.a, 1.0, size)
    return rng.normal(state.a, math.sqrt(state.b), size)
