"""Shared numerical plumbing: deterministic log-sum-exp and a portable PRNG."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Fixed chunk length for reductions. Results depend on it, never on the
# number of workers.
CHUNK = 1 << 14

_MASK64 = (1 << 64) - 1


def _lse_flat(x: np.ndarray) -> float:
    if x.size == 0:
        return -np.inf
    m = np.max(x)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


def _combine(a: float, b: float) -> float:
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + float(np.log1p(np.exp(lo - hi)))


def _tree(parts: list[float]) -> float:
    while len(parts) > 1:
        nxt = [_combine(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0] if parts else -np.inf


def logsumexp(values, workers: int = 1) -> float:
    """log(sum(exp(values))) reduced over fixed chunks in a pairwise tree.

    The chunking is independent of ``workers``, so the result is bit-identical
    for any worker count. An empty input gives ``-inf``.
    """
    x = np.ascontiguousarray(values, dtype=float).ravel()
    chunks = [x[i:i + CHUNK] for i in range(0, x.size, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_lse_flat, chunks))
    else:
        parts = [_lse_flat(c) for c in chunks]
    return _tree(parts)


class SplitMix64:
    """SplitMix64 generator; the output stream is identical on every platform."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        """Integer in [0, k) by multiply-shift."""
        return (self.next_u64() * k) >> 64

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
