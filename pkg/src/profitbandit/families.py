"""One-parameter exponential-family reward models, mean-parametrized.

Four families are supported: Bernoulli, Poisson, Exponential, and
Gaussian with known variance.  Every operation works in mean space; the
natural parametrization is exposed for cross-checking only.  Divergences
are the closed-form KL expressions per family:

- Bernoulli:    x*log(x/y) + (1-x)*log((1-x)/(1-y))
- Poisson:      y - x + x*log(x/y)
- Exponential:  x/y - 1 + log(y/x)
- Gaussian:     (x - y)^2 / (2*variance)

Boundary conventions: 0*log(0) = 0; the divergence is +inf when the
second argument sits on the closed boundary of the mean range and the
arguments differ; arguments strictly outside the closure raise
:class:`DomainError`.

Two standalone divergences serve the bounded-reward policies, which
rescale arbitrary rewards into [0, 1]: :func:`d_bern` (Bernoulli KL on
the closed unit interval) and :func:`d_gauss` (2*(x-y)^2, the
sub-Gaussian surrogate calibrated to [0, 1]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .randomness import Stream

_INF = math.inf

FAMILY_KINDS = ("bernoulli", "poisson", "exponential", "gaussian")


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def _check_finite(name: str, x: float) -> None:
    if math.isnan(x) or math.isinf(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


@dataclass(frozen=True)
class Family:
    """A reward family tag, plus the known variance for the Gaussian one."""

    kind: str
    variance: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(
                f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}"
            )
        if self.kind == "gaussian":
            if self.variance is None:
                raise DomainError("gaussian family requires a known variance")
            if not (self.variance > 0.0 and math.isfinite(self.variance)):
                raise DomainError(
                    f"gaussian variance must be positive and finite, got {self.variance}"
                )
        elif self.variance is not None:
            raise DomainError(f"{self.kind} family takes no variance parameter")

    # -- parametrization ------------------------------------------------

    def mean_range(self) -> tuple[float, float]:
        """Open interval of admissible means."""
        if self.kind == "bernoulli":
            return (0.0, 1.0)
        if self.kind == "gaussian":
            return (-_INF, _INF)
        return (0.0, _INF)  # poisson, exponential

    def _check_mean_interior(self, name: str, m: float) -> None:
        lo, hi = self.mean_range()
        if not (lo < m < hi):
            raise DomainError(
                f"{self.kind} {name} must lie in the open interval ({lo}, {hi}), got {m!r}"
            )

    def _check_mean_closure(self, name: str, m: float) -> None:
        if not math.isfinite(m):
            raise DomainError(f"{self.kind} {name} must be finite, got {m!r}")
        lo, hi = self.mean_range()
        if not (lo <= m <= hi):
            raise DomainError(
                f"{self.kind} {name} must lie in the closed interval [{lo}, {hi}], got {m!r}"
            )

    def natural_param(self, mean: float) -> float:
        """Natural parameter for a given interior mean."""
        self._check_mean_interior("mean", mean)
        if self.kind == "bernoulli":
            return math.log(mean / (1.0 - mean))
        if self.kind == "poisson":
            return math.log(mean)
        if self.kind == "exponential":
            return -1.0 / mean  # natural domain (-inf, 0)
        return mean / self.variance  # gaussian

    def mean_of(self, theta: float) -> float:
        """Mean for a given natural parameter (inverse of natural_param)."""
        _check_finite("natural parameter", theta)
        if self.kind == "bernoulli":
            return 1.0 / (1.0 + math.exp(-theta))
        if self.kind == "poisson":
            return math.exp(theta)
        if self.kind == "exponential":
            if theta >= 0.0:
                raise DomainError(
                    f"exponential natural parameter must be negative, got {theta!r}"
                )
            return -1.0 / theta
        return self.variance * theta  # gaussian

    # -- divergences ----------------------------------------------------

    def kl_natural(self, theta: float, theta_prime: float) -> float:
        """KL divergence between natural parameters via the log-partition.

        K(t, t') = F(t') - F(t) - F'(t) (t' - t), used as a cross-check of
        the mean-space closed forms.
        """
        _check_finite("natural parameter", theta)
        _check_finite("natural parameter", theta_prime)
        if self.kind == "bernoulli":
            # F(t) = log(1 + e^t), F'(t) = sigmoid(t)
            f = _log1pexp(theta)
            fp = _log1pexp(theta_prime)
            grad = 1.0 / (1.0 + math.exp(-theta))
            return fp - f - grad * (theta_prime - theta)
        if self.kind == "poisson":
            # F(t) = e^t
            return math.exp(theta_prime) - math.exp(theta) - math.exp(theta) * (
                theta_prime - theta
            )
        if self.kind == "exponential":
            if theta >= 0.0 or theta_prime >= 0.0:
                raise DomainError("exponential natural parameters must be negative")
            # F(t) = -log(-t), F'(t) = -1/t
            return (
                -math.log(-theta_prime)
                + math.log(-theta)
                + (theta_prime - theta) / theta
            )
        # gaussian: F(t) = variance * t^2 / 2
        diff = theta_prime - theta
        return 0.5 * self.variance * diff * diff

    def divergence(self, x: float, y: float) -> float:
        """Mean-space KL divergence d(x, y) between interior/boundary means."""
        self._check_mean_closure("divergence argument", x)
        self._check_mean_closure("divergence argument", y)
        if x == y:
            return 0.0
        if self.kind == "bernoulli":
            return d_bern(x, y)
        if self.kind == "poisson":
            if y <= 0.0:
                return _INF  # x != y, boundary second argument
            if x == 0.0:
                return y
            return y - x + x * math.log(x / y)
        if self.kind == "exponential":
            if y <= 0.0 or x <= 0.0:
                # either argument at the 0 boundary (x != y) diverges
                return _INF if x != y else 0.0
            return x / y - 1.0 + math.log(y / x)
        diff = x - y  # gaussian
        return diff * diff / (2.0 * self.variance)

    # -- sampling and support -------------------------------------------

    def sample(self, mean: float, stream: Stream) -> float:
        """One reward draw at the given interior mean."""
        if self.kind == "bernoulli":
            return stream.bernoulli(mean)
        if self.kind == "poisson":
            return float(stream.poisson(mean))
        if self.kind == "exponential":
            return stream.exponential(mean)
        return mean + math.sqrt(self.variance) * stream.normal()

    def in_support(self, x: float) -> bool:
        """Whether a value is a possible reward for this family."""
        if not math.isfinite(x):
            return False
        if self.kind == "bernoulli":
            return x == 0.0 or x == 1.0
        if self.kind == "poisson":
            return x >= 0.0 and x == math.floor(x)
        if self.kind == "exponential":
            return x > 0.0
        return True  # gaussian


def _log1pexp(t: float) -> float:
    """log(1 + e^t) without overflow."""
    if t > 36.0:
        return t + math.exp(-t)
    return math.log1p(math.exp(t))


BERNOULLI = Family("bernoulli")
POISSON = Family("poisson")
EXPONENTIAL = Family("exponential")


def gaussian(variance: float = 1.0) -> Family:
    """Gaussian family with the given known variance."""
    return Family("gaussian", variance)


@dataclass(frozen=True)
class Distribution:
    """A reward distribution: a family plus an interior mean."""

    family: Family
    mean: float

    def __post_init__(self):
        _check_finite("mean", self.mean)
        self.family._check_mean_interior("mean", self.mean)

    def sample(self, stream: Stream) -> float:
        return self.family.sample(self.mean, stream)


# -- bounded-reward divergences ----------------------------------------


def d_bern(x: float, y: float) -> float:
    """Bernoulli KL on the closed unit interval (0*log 0 = 0 convention)."""
    if math.isnan(x) or math.isnan(y) or not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"d_bern arguments must lie in [0, 1], got ({x!r}, {y!r})")
    if x == y:
        return 0.0
    if y <= 0.0 or y >= 1.0:
        return _INF  # second argument on the boundary, x != y
    if x == 0.0:
        return -math.log1p(-y)
    if x == 1.0:
        return -math.log(y)
    return x * math.log(x / y) + (1.0 - x) * math.log((1.0 - x) / (1.0 - y))


def d_gauss(x: float, y: float) -> float:
    """Sub-Gaussian quadratic surrogate 2*(x - y)^2 for [0, 1]-valued rewards."""
    _check_finite("d_gauss argument", x)
    _check_finite("d_gauss argument", y)
    diff = x - y
    return 2.0 * diff * diff
