"""Relay placement on a disc around the source.

Relays form a homogeneous Poisson point process on a disc of radius ``R_D``
centred on the source. The destination sits on the positive x-axis at
distance ``d``, so an angle of zero points at it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Disc",
    "PPPConfig",
    "RelayLocation",
    "RelayBatch",
    "counter_rng",
    "relay_destination_distance",
    "sample_ppp",
    "sample_relay_batch",
    "nearest_relay_distance_pdf",
    "nearest_relay_distance_cdf",
]


@dataclass(frozen=True)
class Disc:
    radius: float
    dest_distance: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disc radius must be positive, got {self.radius}")
        if not self.dest_distance > 0:
            raise ValueError(
                f"source-destination distance must be positive, got {self.dest_distance}"
            )

    @property
    def area(self) -> float:
        return np.pi * self.radius**2


@dataclass(frozen=True)
class PPPConfig:
    intensity: float

    def __post_init__(self):
        if not self.intensity >= 0:
            raise ValueError(f"PPP intensity must be >= 0, got {self.intensity}")

    def mean_measure(self, disc: Disc) -> float:
        """Expected relay count on ``disc``."""
        return disc.area * self.intensity


@dataclass(frozen=True)
class RelayLocation:
    r: float
    phi: float
    c: float  # relay-destination distance

    @property
    def source_distance(self) -> float:
        return self.r


def counter_rng(seed: int, index: int = 0, lane: int = 0) -> np.random.Generator:
    """Philox generator for stream ``(seed, lane)`` at block ``index``.

    The batch index occupies the top counter word, so streams for different
    indices never overlap and can be produced in any order.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    key = int(seed) + (int(lane) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(index) << 192))


def relay_destination_distance(r, phi, d):
    """Law of cosines; clipped at zero against round-off."""
    c2 = np.asarray(r) ** 2 + d**2 - 2.0 * np.asarray(r) * d * np.cos(phi)
    return np.sqrt(np.maximum(c2, 0.0))


def _uniform_disc(rng: np.random.Generator, n: int, radius: float):
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    return r, phi


def sample_ppp(disc: Disc, ppp: PPPConfig, rng_seed: int) -> list[RelayLocation]:
    """Draw one PPP realization on ``disc``; deterministic in ``rng_seed``."""
    rng = counter_rng(rng_seed)
    n = int(rng.poisson(ppp.mean_measure(disc)))
    r, phi = _uniform_disc(rng, n, disc.radius)
    c = relay_destination_distance(r, phi, disc.dest_distance)
    return [RelayLocation(float(a), float(b), float(e)) for a, b, e in zip(r, phi, c)]


@dataclass
class RelayBatch:
    """Relay positions for many independent trials, stored flat.

    ``counts[t]`` relays belong to trial ``t``; they occupy the slice
    ``offsets[t]:offsets[t] + counts[t]`` of ``r``, ``phi`` and ``c``.
    """

    counts: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    c: np.ndarray

    @property
    def n_trials(self) -> int:
        return len(self.counts)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.counts)[:-1])).astype(np.int64)

    @property
    def trial_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_trials), self.counts)


def sample_relay_batch(
    disc: Disc,
    ppp: PPPConfig,
    n_trials: int,
    rng: np.random.Generator,
    fixed_count: int | None = None,
    at_least_one: bool = False,
) -> RelayBatch:
    """Relay positions for ``n_trials`` trials.

    ``fixed_count`` overrides the Poisson count. ``at_least_one`` redraws
    empty trials until every trial has a relay.
    """
    if fixed_count is not None:
        counts = np.full(n_trials, int(fixed_count), dtype=np.int64)
    else:
        mu = ppp.mean_measure(disc)
        counts = rng.poisson(mu, n_trials).astype(np.int64)
        if at_least_one:
            if mu <= 0:
                raise ValueError("cannot condition on N >= 1 with zero intensity")
            empty = np.flatnonzero(counts == 0)
            while empty.size:
                counts[empty] = rng.poisson(mu, empty.size)
                empty = empty[counts[empty] == 0]
    r, phi = _uniform_disc(rng, int(counts.sum()), disc.radius)
    c = relay_destination_distance(r, phi, disc.dest_distance)
    return RelayBatch(counts, r, phi, c)


def _zeta(ppp: PPPConfig, disc: Disc) -> float:
    if ppp.intensity <= 0:
        raise ValueError("nearest-relay distribution needs a positive intensity")
    return 1.0 / -np.expm1(-ppp.mean_measure(disc))


def nearest_relay_distance_pdf(r, ppp: PPPConfig, disc: Disc):
    """Density of the source-to-nearest-relay distance given N >= 1."""
    r = np.asarray(r, dtype=float)
    zeta = _zeta(ppp, disc)
    lam = ppp.intensity
    out = 2.0 * zeta * np.pi * lam * r * np.exp(-np.pi * lam * r**2)
    return np.where((r >= 0) & (r <= disc.radius), out, 0.0)


def nearest_relay_distance_cdf(r, ppp: PPPConfig, disc: Disc):
    r = np.clip(np.asarray(r, dtype=float), 0.0, disc.radius)
    zeta = _zeta(ppp, disc)
    return zeta * -np.expm1(-np.pi * ppp.intensity * r**2)
