"""Counter-based random streams and sharded Monte Carlo accumulation.

Every stream is a Philox generator keyed by (seed, stream id, shard), so a
result depends only on the seed, the task name and the shard layout.
"""

import zlib
from dataclasses import dataclass

import numpy as np

CHUNK = 1 << 15


def stream_id(name):
    return zlib.crc32(name.encode("utf-8"))


def generator(seed, stream, shard=0):
    if isinstance(stream, str):
        stream = stream_id(stream)
    key = (int(seed) & (2**64 - 1)) | (int(stream) << 64) | (int(shard) << 96)
    return np.random.Generator(np.random.Philox(key=key))


def shard_sizes(n, shards):
    base, extra = divmod(int(n), int(shards))
    return [base + (1 if i < extra else 0) for i in range(shards)]


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int

    def __add__(self, other):
        return Estimate(self.value + other.value, float(np.hypot(self.stderr, other.stderr)), self.n)

    def scaled(self, c):
        return Estimate(self.value * c, abs(c) * self.stderr, self.n)

    def within(self, target, rtol=0.0, atol=0.0, sigmas=3.0):
        return abs(self.value - target) <= max(atol, rtol * abs(target), sigmas * self.stderr)


@dataclass(frozen=True)
class Moments:
    """Sample moments of a vector-valued per-sample statistic."""

    n: int
    mean: np.ndarray
    cov: np.ndarray

    def estimate(self, weights=None, scale=1.0):
        """Estimate of scale * (weights . mean); defaults to the first column."""
        if weights is None:
            w = np.zeros(self.mean.size)
            w[0] = 1.0
        else:
            w = np.asarray(weights, dtype=float)
        val = float(w @ self.mean) * scale
        var = float(w @ self.cov @ w) / max(self.n, 1)
        return Estimate(val, abs(scale) * float(np.sqrt(max(var, 0.0))), self.n)

    def column(self, i, scale=1.0):
        w = np.zeros(self.mean.size)
        w[i] = 1.0
        return self.estimate(w, scale)


def sharded_moments(fn, n, seed, stream, shards=1, ncols=1):
    """Run fn(rng, m) -> (m,) or (m, ncols) over shards and fixed-size chunks."""
    s1 = np.zeros(ncols)
    s2 = np.zeros((ncols, ncols))
    total = 0
    for shard, m in enumerate(shard_sizes(n, shards)):
        rng = generator(seed, stream, shard)
        done = 0
        while done < m:
            k = min(CHUNK, m - done)
            vals = np.asarray(fn(rng, k), dtype=float).reshape(k, ncols)
            s1 += vals.sum(axis=0)
            s2 += vals.T @ vals
            done += k
        total += m
    if total == 0:
        return Moments(0, np.zeros(ncols), np.zeros((ncols, ncols)))
    mean = s1 / total
    cov = (s2 / total - np.outer(mean, mean)) * (total / max(total - 1, 1))
    return Moments(total, mean, cov)
