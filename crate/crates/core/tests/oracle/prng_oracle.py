#!/usr/bin/env python3
"""Standalone reimplementation of the pinned random stream.

Used to freeze the expected values in tests/sampling_oracle.rs. Shares no
code with the Rust crate.

    splitmix64 step:  state += 0x9E3779B97F4A7C15, then the standard mix
    open uniform:     ((x >> 11) + 0.5) / 2**53
    index below n:    (x * n) >> 64
    standard normal:  Box-Muller on two consecutive open uniforms, cosine branch
    subset of m of n: partial Fisher-Yates over [0, n)
"""
import math

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return ((self.next() >> 11) + 0.5) / float(1 << 53)

    def below(self, n):
        return (self.next() * n) >> 64

    def normal(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def choose(rng, n, m):
    idx = list(range(n))
    for i in range(m):
        j = i + rng.below(n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:m]


def softmax(logits):
    mx = max(logits)
    e = [math.exp(v - mx) for v in logits]
    s = sum(e)
    return [v / s for v in e]


if __name__ == "__main__":
    r = SplitMix64(0)
    print("splitmix64(seed=0) first 3:", [hex(r.next()) for _ in range(3)])

    # build_pool: 100 speakers spk000..spk099 (sorted ids), choose 50, seed 7
    rng = SplitMix64(7)
    chosen = choose(rng, 100, 50)
    print("pool subset seed=7:", sorted(chosen))

    # sample_weights: m=4, seed=42, logits drawn directly from a fresh stream
    rng = SplitMix64(42)
    logits = [rng.normal() for _ in range(4)]
    print("logits seed=42:", [repr(v) for v in logits])
    print("weights seed=42:", [repr(v) for v in softmax(logits)])
