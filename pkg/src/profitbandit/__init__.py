"""Threshold-profitability bandits.

A round-based decision problem over K independent arms: each round the
agent selects a *subset* of arms, every selected arm serves a batch of
clients drawn from its client-count law, and each client yields a reward
from the arm's exponential-family distribution.  An arm is worth serving
when its mean reward clears a known per-arm threshold; regret accrues
for serving arms below their thresholds and for skipping arms above
them.

Modules
-------
families
    One-parameter exponential reward families (Bernoulli, Poisson,
    exponential, Gaussian with known variance) and their divergences.
posteriors
    Conjugate posteriors for those families: updates, CDFs, quantiles,
    posterior sampling.
policies
    Index policies (divergence-based confidence indices, quantile
    indices, posterior sampling, empirical-likelihood indices) and the
    per-arm threshold tests that turn indices into subset selections.
environment
    Arm specifications, client-count laws, the round transition, and the
    credit-approval reduction to Bernoulli arms.
simulate
    Deterministic seeded trajectories, regret recording grids, and
    multi-process experiment aggregation.
bounds
    Asymptotic regret-slope certificates (lower and matching upper
    slopes per log T) for a scenario.
cli
    Command-line front end: run experiments to CSV, print bound
    reports, list packaged scenarios.
"""

__version__ = "0.1.0"
