"""Seeded customer permutations: uniform random and stochastic k-nearest-neighbour.

Randomness comes from SplitMix64 so the same seed yields the same
permutation on every platform:

    state  = (state + 0x9E3779B97F4A7C15) mod 2**64
    z      = state
    z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z      = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output = z ^ (z >> 31)

Integers below ``bound`` use rejection: draw ``r`` until
``r >= (2**64 - bound) % bound`` and return ``r % bound``.  Fisher-Yates
runs from the last slot down, swapping slot ``i`` with ``below(i + 1)``.
Permutation ``k`` of a batch uses seed ``mix64(master ^ mix64(k))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .model import Instance

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        return mix64(self.state)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = ((1 << 64) - bound) % bound
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % bound


def derive_seed(master: int, index: int) -> int:
    return mix64((master & MASK) ^ mix64(index))


def uniform_random(n: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def nearest_unvisited(dist_row: np.ndarray, unvisited: np.ndarray, k: int) -> np.ndarray:
    """The ``min(k, len(unvisited))`` closest unvisited customers, nearest
    first, ties broken by the smaller customer index."""
    values = dist_row[unvisited]
    k = min(k, len(unvisited))
    if k < len(unvisited):
        cutoff = np.partition(values, k - 1)[k - 1]
        mask = values <= cutoff
        idx, values = unvisited[mask], values[mask]
    else:
        idx = unvisited
    order = np.lexsort((idx, values))
    return idx[order[:k]]


def stochastic_knn(instance: Instance, k: int, seed: int) -> list[int]:
    """Start at the depot and repeatedly jump to a uniformly chosen customer
    among the ``k`` nearest unvisited ones."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = SplitMix64(seed)
    D = instance.dist
    n = instance.n
    unvisited = np.arange(1, n + 1)
    current = 0
    perm = []
    while len(unvisited):
        near = nearest_unvisited(D[current], unvisited, k)
        current = int(near[rng.below(len(near))])
        perm.append(current - 1)
        unvisited = unvisited[unvisited != current]
    return perm


@dataclass(frozen=True)
class PermGenConfig:
    kind: str = "knn"  # "knn" or "uniform"
    k: int = 2
    count: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("knn", "uniform"):
            raise ValueError(f"unknown permutation kind {self.kind!r}")
        if self.k < 1 or self.count < 1:
            raise ValueError("k and count must be positive")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "PermGenConfig":
        """Parse ``knn:k=2:count=1000`` or ``uniform:count=50``."""
        kind, *opts = text.strip().split(":")
        values = {}
        for opt in opts:
            key, sep, val = opt.partition("=")
            if not sep or key not in ("k", "count", "seed"):
                raise ValueError(f"bad permutation option {opt!r}")
            values[key] = int(val)
        return cls(kind=kind, seed=values.pop("seed", seed), **values)

    def generate(self, instance: Instance) -> list[list[int]]:
        return [self.one(instance, i) for i in range(self.count)]

    def one(self, instance: Instance, index: int) -> list[int]:
        seed = derive_seed(self.seed, index)
        if self.kind == "uniform":
            return uniform_random(instance.n, seed)
        return stochastic_knn(instance, self.k, seed)


def write_permutations(perms: Iterable[Sequence[int]], out: TextIO) -> None:
    for perm in perms:
        out.write(" ".join(str(c) for c in perm) + "\n")


def read_permutations(text: str) -> list[list[int]]:
    return [[int(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]
