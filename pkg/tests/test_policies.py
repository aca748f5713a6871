"""Tests for exploration budgets, confidence indices, and selection engines."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    d_bern_vec,
    d_exponential_vec,
    d_gauss_family_vec,
    d_gauss_vec,
    d_poisson_vec,
    emp_index_grid,
    index_grid_refined,
)
from profitbandit.environment import ArmSpec, constant_clients, prepare, step
from profitbandit.families import (
    BERNOULLI,
    EXPONENTIAL,
    POISSON,
    Distribution,
    DomainError,
    d_bern,
    d_gauss,
    gaussian,
)
from profitbandit.policies import (
    ArmStatistics,
    MissingObservationsError,
    PolicyConfig,
    bayes_ucb_index,
    bayes_ucb_level,
    emp_kl_ucb_index,
    exploration_level,
    exploration_level_plus,
    kinf_empirical,
    kl_ucb_index,
    make_policy,
    oracle_select,
    select_arms,
    solve_kl_ucb,
    ts_index,
)
from profitbandit.posteriors import PosteriorState, from_counts, prior
from profitbandit.randomness import Stream


def stats_with(n: int, mean: float, keep_samples: bool = False) -> ArmStatistics:
    s = ArmStatistics(keep_samples=keep_samples)
    s.n = n
    s.total = n * mean
    return s


# -- configuration -------------------------------------------------------------


def test_policy_config_validation():
    with pytest.raises(DomainError, match="unknown policy kind"):
        PolicyConfig(kind="ucb1")
    with pytest.raises(DomainError, match="no exploration schedule"):
        PolicyConfig(kind="ts", c=3.0)
    with pytest.raises(DomainError, match="no exploration schedule"):
        PolicyConfig(kind="oracle", c=0.0)
    with pytest.raises(DomainError, match="nonnegative"):
        PolicyConfig(kind="kl-ucb", c=-1.0)
    with pytest.raises(DomainError, match="reward bound"):
        PolicyConfig(kind="emp-kl-ucb")
    with pytest.raises(DomainError, match="reward bound"):
        PolicyConfig(kind="kl-ucb", reward_bound=1.0)
    with pytest.raises(DomainError, match="positive"):
        PolicyConfig(kind="kl-bernoulli-ucb", reward_bound=0.0)


def test_policy_config_defaults():
    assert PolicyConfig(kind="kl-ucb").exploration_c == 3.0
    assert PolicyConfig(kind="kl-ucb-plus").exploration_c == 0.0
    assert PolicyConfig(kind="kl-bernoulli-ucb", reward_bound=1.0).exploration_c == 3.0
    assert PolicyConfig(kind="kl-gaussian-ucb", reward_bound=1.0).exploration_c == 3.0
    assert PolicyConfig(kind="bayes-ucb").exploration_c == 5.0
    assert PolicyConfig(kind="emp-kl-ucb", reward_bound=1.0).exploration_c == 3.0
    assert PolicyConfig(kind="kl-ucb", c=1.5).exploration_c == 1.5
    assert PolicyConfig(kind="kl-ucb").display_label == "kl-ucb"
    assert PolicyConfig(kind="kl-ucb", label="mine").display_label == "mine"
    with pytest.raises(DomainError):
        PolicyConfig(kind="ts").exploration_c


# -- exploration budgets --------------------------------------------------------


def test_exploration_level_values():
    assert exploration_level(1, 3.0) == 0.0
    # log 100 + 3 log log 100, evaluated in double precision
    assert exploration_level(100, 3.0) == pytest.approx(9.186709063411795, abs=1e-12)
    # at t = e the inner log is exactly 1, so the boost term vanishes
    assert exploration_level(math.e, 5.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        exploration_level(0, 3.0)


def test_exploration_level_plus_values():
    assert exploration_level_plus(1, 1, 3.0) == 0.0
    assert exploration_level_plus(100, 10, 0.0) == pytest.approx(
        2.302585092994046, abs=1e-12
    )
    assert exploration_level_plus(10, 10**6, 3.0) == 0.0  # clamped when n >> t
    with pytest.raises(MissingObservationsError):
        exploration_level_plus(10, 0, 3.0)
    with pytest.raises(DomainError):
        exploration_level_plus(0, 1, 3.0)


@settings(deadline=None, max_examples=60)
@given(
    t=st.integers(1, 10**6),
    dt=st.integers(1, 10**6),
    c=st.floats(0.0, 10.0, allow_nan=False),
)
def test_exploration_level_nondecreasing_in_t(t, dt, c):
    assert exploration_level(t + dt, c) >= exploration_level(t, c)


# -- the bisection solver ---------------------------------------------------------


def test_solver_zero_budget_returns_mean_exactly():
    assert solve_kl_ucb(0.3, 5, 0.0, d_bern, 1.0) == 0.3
    assert solve_kl_ucb(2.7, 12, -1.0, d_gauss, math.inf) == 2.7


def test_solver_requires_observations():
    with pytest.raises(MissingObservationsError):
        solve_kl_ucb(0.3, 0, 1.0, d_bern, 1.0)


def test_bernoulli_index_frozen_spot_value():
    # N=10, mean 0.2, t=100, c=3: the 1e-6-lattice oracle gives 0.821786...
    stats = stats_with(10, 0.2)
    config = PolicyConfig(kind="kl-ucb", c=3.0)
    u = kl_ucb_index(stats, BERNOULLI, 100, config)
    assert u == pytest.approx(0.8217860000006219, abs=2e-6)


def test_zero_budget_index_is_mean():
    stats = stats_with(3, 0.4)
    u = kl_ucb_index(stats, BERNOULLI, 1, PolicyConfig(kind="kl-ucb", c=3.0))
    assert u == stats.mean  # exactly the empirical mean, no slack at t = 1


def test_index_requires_observations():
    fresh = ArmStatistics()
    with pytest.raises(MissingObservationsError):
        kl_ucb_index(fresh, BERNOULLI, 10, PolicyConfig(kind="kl-ucb"))
    with pytest.raises(MissingObservationsError):
        fresh.mean


def test_gaussian_bisection_matches_closed_form():
    # n d(m, u) = f with d = 2(u-m)^2 inverts to u = m + B sqrt(f / (2n))
    rng = np.random.default_rng(8)
    for _ in range(200):
        mean = float(rng.uniform(0.0, 3.0))
        n = int(rng.integers(1, 400))
        t = int(rng.integers(2, 10**6))
        c = float(rng.choice([0.0, 3.0, 5.0]))
        bound = float(rng.uniform(0.5, 30.0))
        stats = stats_with(n, min(mean, bound))
        config = PolicyConfig(kind="kl-gaussian-ucb", c=c, reward_bound=bound)
        u = kl_ucb_index(stats, None, t, config)
        f = exploration_level(t, c)
        closed = stats.mean + bound * math.sqrt(f / (2.0 * n))
        assert u == pytest.approx(closed, abs=1e-9)


def test_family_gaussian_bisection_matches_closed_form():
    fam = gaussian(0.49)
    stats = stats_with(7, -1.3)
    u = kl_ucb_index(stats, fam, 1000, PolicyConfig(kind="kl-ucb", c=3.0))
    f = exploration_level(1000, 3.0)
    assert u == pytest.approx(-1.3 + math.sqrt(0.49) * math.sqrt(2.0 * f / 7.0), abs=1e-9)


def test_kl_ucb_index_matches_grid_oracle():
    """1000 random states across families and flavors against the lattice oracle."""
    rng = np.random.default_rng(20260817)
    checked = 0
    for _ in range(250):
        n = int(rng.integers(1, 300))
        t = int(rng.integers(2, 10**6))
        c = float(rng.choice([0.0, 3.0, 5.0]))

        # plain kl-ucb on each family
        mean = float(rng.uniform(0.001, 0.999))
        stats = stats_with(n, mean)
        u = kl_ucb_index(stats, BERNOULLI, t, PolicyConfig(kind="kl-ucb", c=c))
        ref = index_grid_refined(mean, n, exploration_level(t, c), d_bern_vec, 1.0)
        assert abs(u - ref) < 1e-5
        checked += 1

        kind = ["poisson", "exponential", "gaussian"][checked % 3]
        if kind == "poisson":
            mean = float(rng.uniform(0.05, 30.0))
            fam, vec = POISSON, d_poisson_vec
        elif kind == "exponential":
            mean = float(rng.uniform(0.05, 30.0))
            fam, vec = EXPONENTIAL, d_exponential_vec
        else:
            var = float(rng.choice([0.25, 1.0, 4.0]))
            mean = float(rng.uniform(-10.0, 10.0))
            fam, vec = gaussian(var), d_gauss_family_vec(var)
        stats = stats_with(n, mean)
        u = kl_ucb_index(stats, fam, t, PolicyConfig(kind="kl-ucb", c=c))
        ref = index_grid_refined(mean, n, exploration_level(t, c), vec, math.inf)
        assert abs(u - ref) < 1e-5
        checked += 1

        # plus flavor on bernoulli
        mean = float(rng.uniform(0.001, 0.999))
        stats = stats_with(n, mean)
        u = kl_ucb_index(stats, BERNOULLI, t, PolicyConfig(kind="kl-ucb-plus", c=c))
        ref = index_grid_refined(
            mean, n, exploration_level_plus(t, n, c), d_bern_vec, 1.0
        )
        assert abs(u - ref) < 1e-5
        checked += 1

        # bounded bernoulli-divergence flavor with rescaling
        bound = float(rng.uniform(0.5, 50.0))
        mean = float(rng.uniform(0.0, 1.0)) * bound
        stats = stats_with(n, mean)
        config = PolicyConfig(kind="kl-bernoulli-ucb", c=c, reward_bound=bound)
        u = kl_ucb_index(stats, None, t, config)
        ref = bound * index_grid_refined(
            mean / bound, n, exploration_level(t, c), d_bern_vec, 1.0
        )
        assert abs(u - ref) < 1e-5 * max(1.0, bound)
        checked += 1
    assert checked == 1000


def test_index_is_at_least_mean_and_strictly_above_with_budget():
    rng = np.random.default_rng(99)
    for _ in range(100):
        mean = float(rng.uniform(0.01, 0.99))
        n = int(rng.integers(1, 100))
        stats = stats_with(n, mean)
        u = kl_ucb_index(stats, BERNOULLI, 500, PolicyConfig(kind="kl-ucb", c=3.0))
        assert u > mean
    # at the top of the mean range the index cannot exceed the range
    stats = stats_with(5, 1.0)
    u = kl_ucb_index(stats, BERNOULLI, 500, PolicyConfig(kind="kl-ucb", c=3.0))
    assert u == pytest.approx(1.0, abs=1e-9)


def test_index_monotone_in_n_and_t():
    config = PolicyConfig(kind="kl-ucb", c=3.0)
    indices = [
        kl_ucb_index(stats_with(n, 0.3), BERNOULLI, 1000, config) for n in range(1, 51)
    ]
    assert all(a >= b - 1e-12 for a, b in zip(indices, indices[1:]))
    over_t = [
        kl_ucb_index(stats_with(10, 0.3), BERNOULLI, t, config)
        for t in (2, 5, 10, 100, 1000, 10**4, 10**5)
    ]
    assert all(b >= a - 1e-12 for a, b in zip(over_t, over_t[1:]))


def test_gaussian_divergence_index_dominates_bernoulli_divergence_index():
    # Pinsker: d_bern >= d_gauss, so the gaussian-divergence index is larger
    rng = np.random.default_rng(7)
    for _ in range(1000):
        mean = float(rng.uniform(0.0, 1.0))
        n = int(rng.integers(1, 200))
        t = int(rng.integers(2, 10**5))
        stats = stats_with(n, mean)
        ub = kl_ucb_index(
            stats, None, t, PolicyConfig(kind="kl-bernoulli-ucb", reward_bound=1.0)
        )
        ug = kl_ucb_index(
            stats, None, t, PolicyConfig(kind="kl-gaussian-ucb", reward_bound=1.0)
        )
        assert ug >= ub - 1e-12


# -- Bayes-UCB and Thompson -------------------------------------------------------


def test_bayes_ucb_level_values():
    assert bayes_ucb_level(1, 5.0) == 0.5
    assert bayes_ucb_level(2, 0.0) == 0.5
    assert bayes_ucb_level(100, 5.0) == pytest.approx(0.9999951719520109, abs=1e-15)
    assert bayes_ucb_level(10**18, 5.0) == 1.0 - 1e-12  # clamped from above
    with pytest.raises(DomainError):
        bayes_ucb_level(0, 5.0)


def test_bayes_ucb_index_spot_values():
    flat = prior(BERNOULLI, "uniform")  # Beta(1, 1)
    assert bayes_ucb_index(flat, 2, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert bayes_ucb_index(flat, 1, 5.0) == pytest.approx(0.5, abs=1e-12)
    # Beta(3, 1) has CDF x^3; its 0.9-quantile is 0.9^(1/3)
    state = from_counts(flat, 2, 2.0)
    assert (state.a, state.b) == (3.0, 1.0)
    assert bayes_ucb_index(state, 10, 0.0) == pytest.approx(0.9 ** (1.0 / 3.0), rel=1e-12)


def test_ts_index_concentration():
    stream = Stream(4242)
    tight_beta = PosteriorState(BERNOULLI, a=10**6, b=10**6)
    assert all(abs(ts_index(tight_beta, stream) - 0.5) < 0.01 for _ in range(50))
    tight_gamma = PosteriorState(POISSON, a=10**8, b=10**8)
    assert all(abs(ts_index(tight_gamma, stream) - 1.0) < 0.01 for _ in range(50))


def test_ts_index_uniform_tail_fraction():
    # under Beta(1,1), P(draw >= 0.9) = 0.1; 3 sigma over 1e5 draws is 0.003
    stream = Stream(11)
    flat = prior(BERNOULLI, "uniform")
    n = 10**5
    hits = sum(ts_index(flat, stream) >= 0.9 for _ in range(n))
    assert abs(hits / n - 0.1) < 3.0 * math.sqrt(0.1 * 0.9 / n)


# -- empirical-likelihood index ----------------------------------------------------


def test_emp_kl_index_degenerate_cases():
    assert emp_kl_ucb_index([1.0, 1.0, 1.0], 100, 3.0, 1.0) == 1.0  # all at the bound
    assert emp_kl_ucb_index([0.2, 0.4], 1, 3.0, 1.0) == pytest.approx(0.3)  # zero budget
    with pytest.raises(DomainError, match=r"\[0, 1"):
        emp_kl_ucb_index([-0.1, 0.5], 10, 3.0, 1.0)
    with pytest.raises(DomainError, match=r"\[0, 1"):
        emp_kl_ucb_index([0.5, 1.2], 10, 3.0, 1.0)
    with pytest.raises(MissingObservationsError):
        emp_kl_ucb_index([], 10, 3.0, 1.0)


def test_emp_kl_index_two_point_frozen_value():
    # samples {0, 1}, radius f/N = 0.5: the 1e-4 simplex-grid oracle gives 0.8975
    u = emp_kl_ucb_index([0.0, 1.0], math.e, 0.0, 1.0)  # f(e, 0) = 1, N = 2
    assert abs(u - 0.8975) <= 1e-3


def test_emp_kl_index_matches_simplex_grid_oracle():
    rng = np.random.default_rng(515)
    for _ in range(40):
        bound = float(rng.choice([1.0, 2.0, 5.0]))
        x0 = float(rng.uniform(0.0, 0.4)) * bound
        x1 = float(rng.uniform(0.5, 1.0)) * bound
        n0 = int(rng.integers(1, 6))
        n1 = int(rng.integers(1, 6))
        samples = [x0] * n0 + [x1] * n1
        t = int(rng.integers(2, 10**4))
        c = float(rng.choice([0.0, 3.0]))
        u = emp_kl_ucb_index(samples, t, c, bound)
        n = n0 + n1
        values = np.array([x0, x1])
        weights = np.array([n0 / n, n1 / n])
        ref = emp_index_grid(values, weights, bound, exploration_level(t, c) / n, grid=1200)
        # the lattice oracle can only undershoot the true supremum
        assert ref - 1e-9 <= u <= ref + 4e-3 * max(1.0, bound)


def test_emp_kl_index_matches_primal_convex_program():
    from oracles import emp_index_primal

    rng = np.random.default_rng(3131)
    for _ in range(12):
        bound = 2.0
        values = np.sort(rng.uniform(0.0, bound, size=3))
        counts = rng.integers(1, 4, size=3)
        samples = [v for v, k in zip(values, counts) for _ in range(int(k))]
        t = int(rng.integers(5, 2000))
        u = emp_kl_ucb_index(samples, t, 3.0, bound)
        n = len(samples)
        ref = emp_index_primal(
            values, counts / counts.sum(), bound, exploration_level(t, 3.0) / n
        )
        assert u == pytest.approx(ref, abs=1e-5)


def test_emp_kl_index_stays_in_range_and_grows_with_budget():
    rng = np.random.default_rng(2718)
    for _ in range(50):
        bound = 3.0
        samples = list(rng.uniform(0.0, bound, size=int(rng.integers(1, 12))))
        mu = sum(samples) / len(samples)
        previous = mu
        for t in (2, 10, 100, 10**4, 10**8):
            u = emp_kl_ucb_index(samples, t, 3.0, bound)
            assert mu - 1e-12 <= u <= bound + 1e-12
            assert u >= previous - 1e-9  # nondecreasing in the budget
            previous = u


def test_emp_kl_index_reaches_bound_when_radius_is_large():
    # with some mass at the bound, radius >= -log p(bound) pushes all mass there
    samples = [0.0, 1.0, 1.0, 1.0]
    u = emp_kl_ucb_index(samples, 10**9, 3.0, 1.0)  # f(t)/4 >> log(4/3)
    assert u == 1.0


def test_kinf_empirical_basic_properties():
    values = np.array([0.0, 1.0])
    weights = np.array([0.5, 0.5])
    assert kinf_empirical(values, weights, 0.4, 1.0) == 0.0  # below the mean
    assert kinf_empirical(values, weights, 1.0, 1.0) == math.inf  # mass off the bound
    assert kinf_empirical(values, weights, 1.5, 1.0) == math.inf
    # pushing the mean to m in a two-point {0,1} law costs d_bern(mu, m)
    for m in (0.55, 0.7, 0.9, 0.99):
        assert kinf_empirical(values, weights, m, 1.0) == pytest.approx(
            d_bern(0.5, m), abs=1e-9
        )
    all_at_bound = kinf_empirical(np.array([2.0]), np.array([1.0]), 2.0, 2.0)
    assert all_at_bound == 0.0


# -- selection ---------------------------------------------------------------------


def test_select_arms_examples():
    assert select_arms([0.9, 0.1], [0.5, 0.5]) == [0]
    assert select_arms([0.5], [0.5]) == [0]  # tie selects
    assert select_arms([0.1, 0.2], [0.5, 0.5]) == []
    assert select_arms([0.9, 0.9], [0.5, 0.5]) == [0, 1]
    with pytest.raises(ValueError, match="thresholds"):
        select_arms([0.9], [0.5, 0.5])


def test_select_arms_is_decomposable():
    indices = [0.9, 0.1, 0.7, 0.3]
    thresholds = [0.5, 0.5, 0.5, 0.5]
    base = select_arms(indices, thresholds)
    # permuting other arms never changes arm a's membership
    perm = [2, 0, 3, 1]
    permuted = select_arms([indices[p] for p in perm], [thresholds[p] for p in perm])
    for new_pos, old_pos in enumerate(perm):
        assert (new_pos in permuted) == (old_pos in base)


def test_oracle_select():
    specs = [
        ArmSpec(Distribution(BERNOULLI, m), tau, constant_clients(1))
        for m, tau in [(0.1, 0.2), (0.3, 0.2), (0.5, 0.4), (0.5, 0.5), (0.7, 0.8)]
    ]
    assert oracle_select(specs) == [1, 2]  # zero gap on arm 3 is excluded
    assert oracle_select([]) == []


# -- runtime engines: exact threshold tests == index route --------------------------


def _random_scenario(rng, reward_kind):
    k = 3
    specs = []
    for _ in range(k):
        if reward_kind == "bernoulli":
            mean = float(rng.uniform(0.05, 0.95))
            tau = float(rng.uniform(0.05, 0.95))
            dist = Distribution(BERNOULLI, mean)
        else:
            mean = float(rng.uniform(0.5, 6.0))
            tau = float(rng.uniform(0.5, 6.0))
            dist = Distribution(POISSON, mean)
        specs.append(ArmSpec(dist, tau, constant_clients(int(rng.integers(1, 4)))))
    return specs


ENGINE_KINDS = [
    ("kl-ucb", {}),
    ("kl-ucb-plus", {}),
    ("kl-bernoulli-ucb", {"reward_bound": 8.0}),
    ("kl-gaussian-ucb", {"reward_bound": 8.0}),
    ("bayes-ucb", {}),
    ("ts", {}),
    ("emp-kl-ucb", {"reward_bound": 8.0}),
    ("oracle", {}),
]


@pytest.mark.parametrize("kind,extra", ENGINE_KINDS)
def test_engine_selection_equals_index_route(kind, extra):
    """The cached threshold tests must reproduce index-vs-threshold comparison."""
    rng = np.random.default_rng(hash(kind) % 2**32)
    for trial in range(3):
        reward_kind = "bernoulli" if (trial + len(kind)) % 2 else "poisson"
        specs = _random_scenario(rng, reward_kind)
        k = len(specs)
        prepared = prepare(specs)
        config = PolicyConfig(kind=kind, **extra)
        engine = make_policy(config, specs)
        env = Stream(1000 + trial)
        fast_pol = Stream(2000 + trial)
        slow_pol = Stream(2000 + trial)
        thresholds = [s.threshold for s in specs]
        mask = (1 << k) - 1
        for t in range(1, 121):
            out = step(prepared, mask, env)
            for a in range(k):
                if out.rewards[a] is not None:
                    engine.observe(a, out.rewards[a])
            mask = engine.select(t, fast_pol)
            index_values = [engine.index(a, t, slow_pol) for a in range(k)]
            route = 0
            for a in select_arms(index_values, thresholds):
                route |= 1 << a
            if route != mask:
                # a disagreement is only tolerable within numerical-inversion
                # slack of an exact tie between index and threshold
                for a in range(k):
                    if ((route ^ mask) >> a) & 1:
                        assert abs(index_values[a] - thresholds[a]) < 1e-8
                mask = route if kind != "ts" else mask


def test_engine_observe_clamps_to_reward_bound():
    specs = _random_scenario(np.random.default_rng(0), "poisson")
    config = PolicyConfig(kind="emp-kl-ucb", reward_bound=2.0)
    engine = make_policy(config, specs)
    engine.observe(0, [5.0, 1.0, 0.5])
    assert engine.stats[0].mean == pytest.approx((2.0 + 1.0 + 0.5) / 3.0)
    assert max(engine.stats[0].samples) == 2.0
    config = PolicyConfig(kind="kl-bernoulli-ucb", reward_bound=2.0)
    engine = make_policy(config, specs)
    engine.observe(1, [7.0])
    assert engine.stats[1].mean == 2.0


def test_engine_index_requires_observations():
    specs = _random_scenario(np.random.default_rng(1), "bernoulli")
    engine = make_policy(PolicyConfig(kind="kl-ucb"), specs)
    with pytest.raises(MissingObservationsError):
        engine.index(0, 10)
    engine = make_policy(
        PolicyConfig(kind="emp-kl-ucb", reward_bound=1.0), specs
    )
    with pytest.raises(MissingObservationsError):
        engine.index(0, 10)


def test_ts_engine_requires_stream_for_index():
    specs = _random_scenario(np.random.default_rng(2), "bernoulli")
    engine = make_policy(PolicyConfig(kind="ts"), specs)
    engine.observe(0, [1.0])
    with pytest.raises(ValueError, match="stream"):
        engine.index(0, 10)


def test_oracle_engine_selects_true_profitable_set_always():
    specs = [
        ArmSpec(Distribution(BERNOULLI, m), tau, constant_clients(1))
        for m, tau in [(0.1, 0.2), (0.3, 0.2), (0.5, 0.4), (0.5, 0.5), (0.7, 0.8)]
    ]
    engine = make_policy(PolicyConfig(kind="oracle"), specs)
    stream = Stream(0)
    assert engine.select(1, stream) == 0b00110
    engine.observe(0, [0.0])
    assert engine.select(50, stream) == 0b00110
    assert stream.uniform() == Stream(0).uniform()  # oracle consumes no randomness
