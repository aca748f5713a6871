"""Deterministic sampling streams for the simulation harness.

Every random draw in a trajectory flows through a :class:`Stream`: a
buffered sequence of uniform doubles produced by numpy's PCG64 bit
generator, with fixed scalar sampling algorithms layered on top.  numpy
guarantees the raw PCG64 double stream is stable across releases, so the
only thing that has to stay frozen for reproducibility is this module.
The contract is named by :data:`STREAM_ALGORITHM`; any change to a
sampler below, or to its consumption order, must bump that tag.

Uniform-double consumption per call:

``uniform``
    1 draw, value in ``[0, 1)``.
``bernoulli``
    1 draw (``u < p``).
``poisson``
    1 draw per returned value via inverse-transform sequential search;
    means above 500 are split in halves recursively (Poisson additivity),
    each half consuming 1 draw.
``exponential``
    1 draw (inverse CDF); an exact 0.0 draw is redrawn so the value is
    strictly positive.
``normal``
    2 draws on every other call (Box-Muller pair; the second deviate is
    cached and returned by the following call for free).
``gamma``
    Marsaglia-Tsang rejection for shape >= 1: each attempt consumes one
    ``normal`` plus 1 draw.  Shapes below 1 consume one extra draw for
    the power boost.
``beta``
    two ``gamma`` draws.

``derive_seed`` maps a base seed and a (policy, trajectory) index pair to
an independent 64-bit stream seed with a splitmix64 finalizer chain, so
any worker can reconstruct any stream without coordination.
"""

from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

STREAM_ALGORITHM = "pcg64-scalar-v1"

_BLOCK = 4096

# splitmix64 constants (Steele, Lea & Flood's SplittableRandom finalizer).
_MASK64 = 0xFFFFFFFFFFFFFFFF
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_M1 = 0xBF58476D1CE4E5B9
_SM64_M2 = 0x94D049BB133111EB


def _splitmix64(x: int) -> int:
    x = (x + _SM64_GAMMA) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * _SM64_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_M2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, policy_index: int, trajectory_index: int) -> int:
    """Stream seed for one (policy, trajectory) cell of an experiment.

    Stateless avalanche-quality mix of the triple: three chained
    splitmix64 finalizer steps.  Distinct triples give distinct,
    well-separated seeds for all practical experiment sizes.
    """
    if policy_index < 0 or trajectory_index < 0:
        raise ValueError("policy and trajectory indices must be nonnegative")
    z = _splitmix64(base_seed & _MASK64)
    z = _splitmix64(z ^ ((policy_index + 1) & _MASK64))
    z = _splitmix64(z ^ ((trajectory_index + 1) & _MASK64))
    return z


class Stream:
    """Scalar sampler over a buffered PCG64 uniform-double sequence."""

    __slots__ = ("_gen", "_buf", "_pos", "_spare_normal")

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._buf = self._gen.random(_BLOCK).tolist()
        self._pos = 0
        self._spare_normal: float | None = None

    def uniform(self) -> float:
        """Next uniform double in [0, 1)."""
        pos = self._pos
        buf = self._buf
        if pos == _BLOCK:
            buf = self._gen.random(_BLOCK).tolist()
            self._buf = buf
            pos = 0
        self._pos = pos + 1
        return buf[pos]

    def uniforms(self, n: int) -> list[float]:
        """Next ``n`` uniform doubles (same stream as ``n`` scalar calls)."""
        pos = self._pos
        end = pos + n
        if end <= _BLOCK:
            self._pos = end
            return self._buf[pos:end]
        out = self._buf[pos:]
        need = end - _BLOCK
        while need > _BLOCK:
            out.extend(self._gen.random(_BLOCK).tolist())
            need -= _BLOCK
        self._buf = self._gen.random(_BLOCK).tolist()
        self._pos = need
        out.extend(self._buf[:need])
        return out

    def bernoulli(self, p: float) -> float:
        """0.0/1.0 draw with success probability ``p``."""
        return 1.0 if self.uniform() < p else 0.0

    def poisson(self, mu: float) -> int:
        """Poisson draw by inverse-transform sequential search."""
        if mu <= 0.0:
            return 0
        if mu > 500.0:
            # exp(-mu) underflows; split by additivity.
            half = 0.5 * mu
            return self.poisson(half) + self.poisson(mu - half)
        u = self.uniform()
        p = math.exp(-mu)
        cum = p
        k = 0
        while u > cum:
            k += 1
            p *= mu / k
            cum += p
            if p == 0.0:  # CDF saturated below u by rounding
                break
        return k

    def exponential(self, mean: float) -> float:
        """Exponential draw with the given mean, strictly positive."""
        u = self.uniform()
        while u == 0.0:
            u = self.uniform()
        return -mean * math.log1p(-u)

    def normal(self) -> float:
        """Standard normal draw (Box-Muller, spare deviate cached)."""
        spare = self._spare_normal
        if spare is not None:
            self._spare_normal = None
            return spare
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log1p(-u1))
        theta = 6.283185307179586 * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def gamma(self, shape: float) -> float:
        """Gamma(shape, scale=1) draw by Marsaglia-Tsang squeeze/transform."""
        if shape <= 0.0:
            raise ValueError(f"gamma shape must be positive, got {shape}")
        if shape < 1.0:
            # Boost: Gamma(shape) = Gamma(shape + 1) * U^(1/shape).
            boost = (1.0 - self.uniform()) ** (1.0 / shape)
            return boost * self.gamma(shape + 1.0)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            t = 1.0 + c * x
            if t <= 0.0:
                continue
            v = t * t * t
            u = self.uniform()
            x2 = x * x
            if u < 1.0 - 0.0331 * x2 * x2:
                return d * v
            if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
                return d * v

    def beta(self, a: float, b: float) -> float:
        """Beta(a, b) draw as a ratio of two gamma draws."""
        x = self.gamma(a)
        y = self.gamma(b)
        return x / (x + y)


class PoissonTable:
    """Precomputed inverse-transform table for a fixed Poisson mean.

    Value- and consumption-identical to ``Stream.poisson(mu)`` — the table
    stores the same partial CDF floats the sequential search would build,
    and draws beyond the table tail fall back to continuing the search —
    so hot loops can swap it in without changing any stream.
    """

    __slots__ = ("mu", "_cdf", "_tail_p")

    def __init__(self, mu: float, tail: float = 1e-18):
        if not 0.0 < mu <= 500.0:
            raise ValueError(f"table requires 0 < mu <= 500, got {mu}")
        self.mu = mu
        p = math.exp(-mu)
        cum = p
        cdf = [cum]
        k = 0
        while (1.0 - cum > tail or k < mu) and p > 0.0:
            k += 1
            p *= mu / k
            cum += p
            cdf.append(cum)
        self._cdf = cdf
        self._tail_p = p

    def draw(self, stream: Stream) -> int:
        u = stream.uniform()
        cdf = self._cdf
        if u <= cdf[-1]:
            return bisect_left(cdf, u)
        # Tail: continue the sequential search past the stored entries.
        k = len(cdf) - 1
        p = self._tail_p
        cum = cdf[-1]
        mu = self.mu
        while u > cum:
            k += 1
            p *= mu / k
            cum += p
            if p == 0.0:
                break
        return k
