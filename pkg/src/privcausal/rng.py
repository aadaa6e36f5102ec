"""Deterministic random streams.

A stream is identified by a 64-bit master seed and a path of 64-bit labels.
The generator for a stream is numpy's PCG64 seeded with
``SeedSequence(entropy=master, spawn_key=path)``; SeedSequence hashes the
master seed and every path element into the initial state, so distinct paths
give statistically independent streams and the same (master, path) always
reproduces the same bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSeed:
    master: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master <= _MASK64:
            raise ValueError("master seed must be a 64-bit unsigned integer")
        path = tuple(int(p) for p in self.path)
        if any(not 0 <= p <= _MASK64 for p in path):
            raise ValueError("stream labels must be 64-bit unsigned integers")
        object.__setattr__(self, "path", path)

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def child(self, *labels: int) -> "RngSeed":
        return RngSeed(self.master, self.path + tuple(labels))

    def path_str(self) -> str:
        return "/".join(str(p) for p in self.path)

    @classmethod
    def parse(cls, master: int, path_str: str) -> "RngSeed":
        return cls(master, tuple(int(p) for p in path_str.split("/") if p))


def derive_stream(seed: RngSeed, label: int) -> RngSeed:
    """Child stream ``label`` of ``seed``."""
    return seed.child(label)


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngSeed`, a Generator or an int seed."""
    if isinstance(rng, RngSeed):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
