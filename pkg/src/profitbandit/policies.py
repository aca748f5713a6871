"""Index policies for threshold-profitability bandits.

Every policy assigns each arm an upper-confidence-style index ``u_a(t)``
after round ``t`` and selects for round ``t + 1`` exactly the arms with
``u_a(t) >= threshold_a`` (ties select).  Round one always pulls every
arm, so indices are only ever queried with at least one observation.

Index families:

- ``kl-ucb`` / ``kl-ucb-plus``: sup of means within an exploration
  budget of reward-family KL around the empirical mean, with budgets
  ``log t + c log(max(1, log t))`` and ``log(t max(1, log t)^c / N)``.
- ``kl-bernoulli-ucb`` / ``kl-gaussian-ucb``: same construction with the
  family-agnostic divergences :func:`~profitbandit.families.d_bern` and
  :func:`~profitbandit.families.d_gauss` applied to rewards rescaled
  into [0, 1] by a known bound ``B``.
- ``bayes-ucb``: posterior quantile at level ``1 - 1/(t max(1, log t)^c)``
  (clamped to [0.5, 1 - 1e-12]).
- ``ts``: one posterior draw of the mean (Thompson).
- ``emp-kl-ucb``: empirical-likelihood KL-UCB for [0, B]-supported
  rewards; the feasible-mean program is solved through its concave
  one-dimensional dual.
- ``oracle``: selects exactly the arms whose true gap is positive.

The runtime engine (:func:`make_policy`) never re-solves indices in the
simulation hot loop.  Because each index is a monotone function of a
scalar statistic, ``u_a(t) >= tau_a`` has an exact closed test:

- KL indices:      ``mean >= tau`` or ``N * d(mean, tau) <= budget(t)``
- Bayes-UCB:       ``level(t) >= posterior_cdf(tau)``
- emp-KL-UCB:      ``mean >= tau`` or ``N * Kinf(empirical, tau) <= budget(t)``
- TS:              draw the index (it is random by design)

These tests reproduce the index comparison exactly (the CDF form is in
fact sharper than inverting the quantile numerically), and the cached
statistic per arm only changes when the arm is observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import DomainError, Family, d_bern, d_gauss
from .posteriors import PosteriorState, from_counts, prior, quantile, sample_mean
from .posteriors import cdf as posterior_cdf
from .randomness import Stream

POLICY_KINDS = (
    "kl-ucb",
    "kl-ucb-plus",
    "kl-bernoulli-ucb",
    "kl-gaussian-ucb",
    "bayes-ucb",
    "ts",
    "emp-kl-ucb",
    "oracle",
)

BOUNDED_KINDS = frozenset({"kl-bernoulli-ucb", "kl-gaussian-ucb", "emp-kl-ucb"})

_DEFAULT_C = {
    "kl-ucb": 3.0,
    "kl-ucb-plus": 0.0,
    "kl-bernoulli-ucb": 3.0,
    "kl-gaussian-ucb": 3.0,
    "bayes-ucb": 5.0,
    "emp-kl-ucb": 3.0,
}

_BOUNDARY_NUDGE = 1e-12


class MissingObservationsError(RuntimeError):
    """An index was queried for an arm with no observations yet."""


@dataclass(frozen=True)
class PolicyConfig:
    """Which policy to run and with what knobs.

    ``c`` is the exploration boost; ``None`` means the per-kind default
    (3 for the KL indices, 0 for kl-ucb-plus, 5 for bayes-ucb).
    ``reward_bound`` is the known reward bound ``B`` and is required for
    exactly the bounded-reward kinds.  ``prior_kind`` only matters for
    the Bayesian kinds.
    """

    kind: str
    c: float | None = None
    reward_bound: float | None = None
    prior_kind: str = "jeffreys"
    label: str | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise DomainError(
                f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}"
            )
        if self.c is not None:
            if self.kind in ("ts", "oracle"):
                raise DomainError(f"{self.kind} has no exploration schedule; c must be unset")
            if not (self.c >= 0.0 and math.isfinite(self.c)):
                raise DomainError(f"exploration boost c must be nonnegative, got {self.c}")
        if self.kind in BOUNDED_KINDS:
            if self.reward_bound is None:
                raise DomainError(f"{self.kind} requires a reward bound")
            if not (self.reward_bound > 0.0 and math.isfinite(self.reward_bound)):
                raise DomainError(
                    f"reward bound must be positive and finite, got {self.reward_bound}"
                )
        elif self.reward_bound is not None:
            raise DomainError(f"{self.kind} takes no reward bound")

    @property
    def exploration_c(self) -> float:
        if self.kind in ("ts", "oracle"):
            raise DomainError(f"{self.kind} has no exploration schedule")
        return self.c if self.c is not None else _DEFAULT_C[self.kind]

    @property
    def display_label(self) -> str:
        return self.label if self.label is not None else self.kind


class ArmStatistics:
    """Running observation count, reward sum, and optional raw-sample log."""

    __slots__ = ("n", "total", "samples")

    def __init__(self, keep_samples: bool = False):
        self.n = 0
        self.total = 0.0
        self.samples: list[float] | None = [] if keep_samples else None

    def observe(self, x: float) -> None:
        self.n += 1
        self.total += x
        if self.samples is not None:
            self.samples.append(x)

    @property
    def mean(self) -> float:
        if self.n == 0:
            raise MissingObservationsError("arm has no observations yet")
        return self.total / self.n


# -- exploration budgets -----------------------------------------------------


def exploration_level(t: int, c: float) -> float:
    """Budget ``max(0, log t + c log(max(1, log t)))``."""
    if t < 1:
        raise DomainError(f"round index must be >= 1, got {t}")
    lt = math.log(t)
    return max(0.0, lt + c * math.log(max(1.0, lt)))


def exploration_level_plus(t: int, n: int, c: float) -> float:
    """Budget ``max(0, log(t max(1, log t)^c / n))`` of the plus variant."""
    if t < 1:
        raise DomainError(f"round index must be >= 1, got {t}")
    if n < 1:
        raise MissingObservationsError("plus budget needs at least one observation")
    lt = math.log(t)
    return max(0.0, math.log(t * max(1.0, lt) ** c / n))


# -- KL-UCB index ------------------------------------------------------------


def solve_kl_ucb(mean: float, n: int, budget: float, div, upper: float) -> float:
    """``sup{q >= mean : n * div(mean, q) <= budget}`` by bisection.

    ``div`` must be continuous and nondecreasing in its second argument
    above ``mean``; ``upper`` bounds the search (``inf`` grows the
    bracket geometrically).  Absolute tolerance 1e-12, 200 iterations.
    """
    if n <= 0:
        raise MissingObservationsError("index needs at least one observation")
    if budget <= 0.0:
        return mean
    lo = mean
    if math.isinf(upper):
        width = 1.0
        hi = mean + width
        while n * div(mean, hi) <= budget:
            lo = hi
            width *= 2.0
            hi = mean + width
            if width > 1e300:  # divergence failed to grow; treat as unbounded
                return hi
    else:
        hi = upper
        if n * div(mean, hi) <= budget:
            return hi
    for _ in range(200):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if n * div(mean, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _nudged(mean: float, lo: float, hi: float) -> float:
    """Empirical mean pushed off the closed boundary of the mean range."""
    if mean <= lo:
        return lo + _BOUNDARY_NUDGE
    if mean >= hi:
        return hi - _BOUNDARY_NUDGE
    return mean


def kl_ucb_index(
    stats: ArmStatistics, family: Family | None, t: int, config: PolicyConfig
) -> float:
    """Confidence index for the four KL-UCB flavors selected by ``config``."""
    n = stats.n
    if n == 0:
        raise MissingObservationsError("index needs at least one observation")
    kind = config.kind
    c = config.exploration_c
    if kind == "kl-ucb-plus":
        budget = exploration_level_plus(t, n, c)
    else:
        budget = exploration_level(t, c)
    if kind in ("kl-ucb", "kl-ucb-plus"):
        if family is None:
            raise DomainError(f"{kind} requires the reward family")
        lo, hi = family.mean_range()
        return solve_kl_ucb(_nudged(stats.mean, lo, hi), n, budget, family.divergence, hi)
    bound = config.reward_bound
    scaled_mean = min(max(stats.mean / bound, 0.0), 1.0)
    if kind == "kl-bernoulli-ucb":
        mean = _nudged(scaled_mean, 0.0, 1.0)
        return bound * solve_kl_ucb(mean, n, budget, d_bern, 1.0)
    if kind == "kl-gaussian-ucb":
        return bound * solve_kl_ucb(scaled_mean, n, budget, d_gauss, math.inf)
    raise DomainError(f"{kind} is not a KL-UCB policy kind")


# -- Bayesian indices ---------------------------------------------------------


def bayes_ucb_level(t: int, c: float) -> float:
    """Quantile level ``1 - 1/(t max(1, log t)^c)`` clamped to [0.5, 1-1e-12]."""
    if t < 1:
        raise DomainError(f"round index must be >= 1, got {t}")
    level = 1.0 - 1.0 / (t * max(1.0, math.log(t)) ** c)
    return min(1.0 - 1e-12, max(0.5, level))


def bayes_ucb_index(state: PosteriorState, t: int, c: float) -> float:
    """Posterior mean-space quantile at the shrinking Bayes-UCB level."""
    return quantile(state, bayes_ucb_level(t, c))


def ts_index(state: PosteriorState, stream: Stream) -> float:
    """Thompson index: one posterior draw of the arm mean."""
    return sample_mean(state, stream)


# -- empirical-likelihood KL-UCB ----------------------------------------------


def kinf_empirical(values, weights, m: float, bound: float) -> float:
    """Smallest KL(empirical, q) over laws q on [0, bound] with mean >= m.

    Solved through the concave dual
    ``max_{0 <= lam <= 1/(bound - m)} sum_i w_i log(1 - lam (x_i - m))``
    by bisection on the derivative.  Returns 0 when the empirical mean
    already reaches ``m`` and ``inf`` when ``m`` is unreachable.  Plain
    Python arithmetic throughout: the supports seen here are a handful
    of points, well below where vectorizing pays.
    """
    vals = [float(v) for v in values]
    wts = [float(w) for w in weights]
    mu = 0.0
    for v, w in zip(vals, wts):
        mu += w * v
    if m <= mu:
        return 0.0
    if m > bound:
        return math.inf
    p_bound = 0.0
    for v, w in zip(vals, wts):
        if v >= bound:
            p_bound += w
    if m == bound:
        return 0.0 if p_bound >= 1.0 else math.inf
    lam_hi = 1.0 / (bound - m)
    pairs = [(w, v - m) for v, w in zip(vals, wts)]

    def deriv(lam: float) -> float:
        total = 0.0
        for w, d in pairs:
            total += w * (-d) / (1.0 - lam * d)
        return total

    if p_bound == 0.0 and deriv(lam_hi) >= 0.0:
        lam = lam_hi
    else:
        # 64 halvings push the bracket far below double resolution, and
        # the value error at a concave maximum is second-order anyway
        lo = 0.0
        hi = lam_hi
        for _ in range(64):
            lam = 0.5 * (lo + hi)
            if deriv(lam) > 0.0:
                lo = lam
            else:
                hi = lam
        lam = lo  # feasible side: all log arguments strictly positive
    val = 0.0
    for w, d in pairs:
        arg = 1.0 - lam * d
        if arg <= 0.0:
            val = -math.inf
            break
        val += w * math.log(arg)
    return max(0.0, val)


def _empirical_law(samples, bound: float) -> tuple[np.ndarray, np.ndarray, float]:
    values, counts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
    if values.size == 0:
        raise MissingObservationsError("index needs at least one observation")
    if values[0] < 0.0 or values[-1] > bound:
        raise DomainError(
            f"samples must lie in [0, {bound}], got range [{values[0]}, {values[-1]}]"
        )
    weights = counts / counts.sum()
    return values, weights, float(np.dot(weights, values))


def emp_kl_ucb_index(samples, t: int, c: float, bound: float) -> float:
    """Empirical-likelihood confidence index for [0, bound]-valued samples.

    Largest mean of a law on the observed support plus the bound point
    whose KL from the empirical law stays within ``exploration_level(t, c) / n``.
    """
    values, weights, mu = _empirical_law(samples, bound)
    n = len(samples)
    radius = exploration_level(t, c) / n
    if radius <= 0.0:
        return mu
    if mu >= bound:
        return bound
    p_bound = float(weights[values >= bound].sum())
    if p_bound > 0.0 and radius >= -math.log(p_bound):
        return bound  # mass can be pushed entirely to the bound point
    lo, hi = mu, bound
    for _ in range(100):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if kinf_empirical(values, weights, mid, bound) <= radius:
            lo = mid
        else:
            hi = mid
    return lo


# -- subset selection ----------------------------------------------------------


def select_arms(indices, thresholds) -> list[int]:
    """Arms whose index reaches its threshold (ties select)."""
    if len(indices) != len(thresholds):
        raise ValueError(
            f"got {len(indices)} indices for {len(thresholds)} thresholds"
        )
    return [a for a, (u, tau) in enumerate(zip(indices, thresholds)) if u >= tau]


def oracle_select(specs) -> list[int]:
    """Arms whose true mean strictly exceeds their threshold."""
    return [a for a, spec in enumerate(specs) if spec.delta > 0.0]


# -- runtime engines -----------------------------------------------------------


class _PolicyEngine:
    """Per-trajectory state for one policy over K arms.

    ``select(t, stream)`` returns the selected subset for round ``t + 1``
    as a bitmask, using the exact threshold tests documented in the
    module docstring; ``index(arm, t, stream)`` evaluates the actual
    index (TS draws consume the stream).
    """

    def __init__(self, config: PolicyConfig, specs):
        self.config = config
        self.specs = list(specs)
        self.k = len(self.specs)
        keep = config.kind == "emp-kl-ucb"
        self.stats = [ArmStatistics(keep_samples=keep) for _ in range(self.k)]
        self.thresholds = [spec.threshold for spec in self.specs]

    @property
    def initial_mask(self) -> int:
        """Round-one selection: a forced pull of every arm.

        Index policies need an observation per arm before any index is
        defined; the oracle overrides this (it never needs data).
        """
        return (1 << self.k) - 1

    def observe(self, arm: int, rewards) -> None:
        raise NotImplementedError

    def select(self, t: int, stream: Stream) -> int:
        raise NotImplementedError

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        raise NotImplementedError


class _KlEngine(_PolicyEngine):
    def __init__(self, config: PolicyConfig, specs):
        super().__init__(config, specs)
        kind = config.kind
        self._plus = kind == "kl-ucb-plus"
        self._c = config.exploration_c
        self._bound = config.reward_bound
        self._space = (
            "family" if kind in ("kl-ucb", "kl-ucb-plus")
            else ("bern" if kind == "kl-bernoulli-ucb" else "gauss")
        )
        # per arm: empirical mean reached threshold / n * d(mean, tau) cache
        self._meanok = [False] * self.k
        self._scaled_div = [math.inf] * self.k

    def observe(self, arm: int, rewards) -> None:
        stats = self.stats[arm]
        bound = self._bound
        if bound is None:
            for x in rewards:
                stats.observe(x)
        else:
            for x in rewards:
                stats.observe(max(0.0, min(x, bound)))
        tau = self.thresholds[arm]
        mean = stats.total / stats.n
        if mean >= tau:
            self._meanok[arm] = True
            self._scaled_div[arm] = 0.0
            return
        self._meanok[arm] = False
        if self._space == "family":
            family = self.specs[arm].dist.family
            lo, hi = family.mean_range()
            div = family.divergence(_nudged(mean, lo, hi), tau)
        elif self._space == "bern":
            t_resc = tau / bound
            if t_resc > 1.0:
                div = math.inf
            else:
                div = d_bern(_nudged(min(mean / bound, 1.0), 0.0, 1.0), t_resc)
        else:  # gauss
            div = d_gauss(mean / bound, tau / bound)
        self._scaled_div[arm] = stats.n * div

    def select(self, t: int, stream: Stream) -> int:
        mask = 0
        meanok = self._meanok
        scaled = self._scaled_div
        if self._plus:
            tm = t * max(1.0, math.log(t)) ** self._c
            stats = self.stats
            for a in range(self.k):
                if meanok[a] or scaled[a] <= max(0.0, math.log(tm / stats[a].n)):
                    mask |= 1 << a
        else:
            f = exploration_level(t, self._c)
            for a in range(self.k):
                if meanok[a] or scaled[a] <= f:
                    mask |= 1 << a
        return mask

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        family = self.specs[arm].dist.family if self._space == "family" else None
        return kl_ucb_index(self.stats[arm], family, t, self.config)


class _BayesEngine(_PolicyEngine):
    def __init__(self, config: PolicyConfig, specs):
        super().__init__(config, specs)
        self._c = config.exploration_c
        self._priors = [
            prior(spec.dist.family, config.prior_kind) for spec in self.specs
        ]
        self._posteriors: list[PosteriorState] = list(self._priors)
        self._cdf_tau = [math.inf] * self.k  # improper: never selected via cdf

    def observe(self, arm: int, rewards) -> None:
        stats = self.stats[arm]
        for x in rewards:
            stats.observe(x)
        state = from_counts(self._priors[arm], stats.n, stats.total)
        self._posteriors[arm] = state
        tau = self.thresholds[arm]
        self._cdf_tau[arm] = posterior_cdf(state, tau)

    def select(self, t: int, stream: Stream) -> int:
        level = bayes_ucb_level(t, self._c)
        mask = 0
        cdf_tau = self._cdf_tau
        for a in range(self.k):
            if level >= cdf_tau[a]:
                mask |= 1 << a
        return mask

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        return bayes_ucb_index(self._posteriors[arm], t, self._c)


class _TsEngine(_PolicyEngine):
    def __init__(self, config: PolicyConfig, specs):
        super().__init__(config, specs)
        self._priors = [
            prior(spec.dist.family, config.prior_kind) for spec in self.specs
        ]
        self._posteriors: list[PosteriorState] = list(self._priors)

    def observe(self, arm: int, rewards) -> None:
        stats = self.stats[arm]
        for x in rewards:
            stats.observe(x)
        self._posteriors[arm] = from_counts(self._priors[arm], stats.n, stats.total)

    def select(self, t: int, stream: Stream) -> int:
        mask = 0
        posteriors = self._posteriors
        thresholds = self.thresholds
        for a in range(self.k):
            if sample_mean(posteriors[a], stream) >= thresholds[a]:
                mask |= 1 << a
        return mask

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        if stream is None:
            raise ValueError("the Thompson index is a posterior draw; pass a stream")
        return ts_index(self._posteriors[arm], stream)


class _EmpKlEngine(_PolicyEngine):
    def __init__(self, config: PolicyConfig, specs):
        super().__init__(config, specs)
        self._c = config.exploration_c
        self._bound = config.reward_bound
        self._hist = [dict() for _ in range(self.k)]
        self._meanok = [False] * self.k
        self._scaled_kinf = [math.inf] * self.k

    def observe(self, arm: int, rewards) -> None:
        stats = self.stats[arm]
        hist = self._hist[arm]
        bound = self._bound
        for x in rewards:
            x = max(0.0, min(x, bound))
            stats.observe(x)
            hist[x] = hist.get(x, 0) + 1
        tau = self.thresholds[arm]
        mean = stats.total / stats.n
        if mean >= tau:
            self._meanok[arm] = True
            self._scaled_kinf[arm] = 0.0
            return
        self._meanok[arm] = False
        n = stats.n
        weights = [count / n for count in hist.values()]
        self._scaled_kinf[arm] = n * kinf_empirical(
            list(hist.keys()), weights, tau, bound
        )

    def select(self, t: int, stream: Stream) -> int:
        f = exploration_level(t, self._c)
        mask = 0
        meanok = self._meanok
        scaled = self._scaled_kinf
        for a in range(self.k):
            if meanok[a] or scaled[a] <= f:
                mask |= 1 << a
        return mask

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        samples = self.stats[arm].samples
        if not samples:
            raise MissingObservationsError("index needs at least one observation")
        return emp_kl_ucb_index(samples, t, self._c, self._bound)


class _OracleEngine(_PolicyEngine):
    def __init__(self, config: PolicyConfig, specs):
        super().__init__(config, specs)
        mask = 0
        for a in oracle_select(self.specs):
            mask |= 1 << a
        self._mask = mask

    @property
    def initial_mask(self) -> int:
        return self._mask  # the oracle plays the true profitable set from round one

    def observe(self, arm: int, rewards) -> None:
        stats = self.stats[arm]
        for x in rewards:
            stats.observe(x)

    def select(self, t: int, stream: Stream) -> int:
        return self._mask

    def index(self, arm: int, t: int, stream: Stream | None = None) -> float:
        return math.inf if (self._mask >> arm) & 1 else -math.inf


_ENGINES = {
    "kl-ucb": _KlEngine,
    "kl-ucb-plus": _KlEngine,
    "kl-bernoulli-ucb": _KlEngine,
    "kl-gaussian-ucb": _KlEngine,
    "bayes-ucb": _BayesEngine,
    "ts": _TsEngine,
    "emp-kl-ucb": _EmpKlEngine,
    "oracle": _OracleEngine,
}


def make_policy(config: PolicyConfig, specs) -> _PolicyEngine:
    """Runtime engine for one policy over the given arm specifications."""
    return _ENGINES[config.kind](config, specs)
