"""End-to-end SNR of the single-source relay-usage strategies.

Every strategy combines the direct link with whatever the relays deliver in
the second slot (MRC, so SNRs add). A relay that cannot decode stays silent.
Scalar functions operate on a :class:`RelayRealization`; ``batch_snr`` does
the same for many trials held in flat arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ScenarioParams, harvested_relay_power, path_gain
from .geometry import Disc, PPPConfig, counter_rng, relay_destination_distance

__all__ = [
    "StrategyKind",
    "RelayRealization",
    "TrialBatch",
    "snr_direct",
    "snr_random_relay",
    "select_closest_relay",
    "snr_beamforming",
    "beamforming_transmit_powers",
    "outage_event",
    "batch_snr",
]


class StrategyKind(enum.Enum):
    RANDOM_RELAY = "random"
    CLOSEST_RELAY = "closest"
    BEAMFORMING = "beamforming"
    DIRECT_ONLY = "direct"

    @property
    def needs_relay(self) -> bool:
        return self is not StrategyKind.DIRECT_ONLY


@dataclass
class RelayRealization:
    """One sampled network reduced to normalized channel gains.

    ``x0`` is the direct-link gain, ``x[i]`` and ``y[i]`` the source-relay and
    relay-destination gains of relay ``i`` at source distance ``r[i]``.
    """

    x0: float
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        self.r = np.atleast_1d(np.asarray(self.r, dtype=float))
        if not (self.x.shape == self.y.shape == self.r.shape):
            raise ValueError("x, y and r must have one entry per relay")

    @property
    def n_relays(self) -> int:
        return len(self.x)

    def qualified(self, params: ScenarioParams) -> np.ndarray:
        """Mask of relays able to decode the source message."""
        return self.x > params.epsilon

    @classmethod
    def draw(
        cls, disc: Disc, ppp: PPPConfig, params: ScenarioParams, seed: int
    ) -> "RelayRealization":
        rng = counter_rng(seed)
        n = int(rng.poisson(ppp.mean_measure(disc)))
        r = disc.radius * np.sqrt(rng.random(n))
        phi = 2.0 * np.pi * rng.random(n)
        c = relay_destination_distance(r, phi, disc.dest_distance)
        h2, g2 = rng.exponential(size=n), rng.exponential(size=n)
        hd2 = rng.exponential()
        a = params.alpha
        return cls(
            x0=hd2 * path_gain(disc.dest_distance, a),
            x=h2 * path_gain(r, a),
            y=g2 * path_gain(c, a),
            r=r,
        )


def snr_direct(real: RelayRealization, params: ScenarioParams) -> float:
    return params.power * real.x0


def _relay_increment(params: ScenarioParams, x, y):
    return y * harvested_relay_power(params, x)


def snr_random_relay(real: RelayRealization, params: ScenarioParams, chosen: int) -> float:
    if not 0 <= chosen < real.n_relays:
        raise IndexError(f"relay {chosen} not present (N = {real.n_relays})")
    inc = _relay_increment(params, real.x[chosen], real.y[chosen])
    return float(snr_direct(real, params) + inc)


def select_closest_relay(real: RelayRealization) -> int:
    """Index of the relay nearest the source; lowest index wins ties."""
    if real.n_relays == 0:
        raise ValueError("no relays to select from")
    return int(np.argmin(real.r))


def snr_beamforming(real: RelayRealization, params: ScenarioParams) -> float:
    inc = _relay_increment(params, real.x, real.y)
    return float(snr_direct(real, params) + inc.sum())


def beamforming_transmit_powers(real: RelayRealization, params: ScenarioParams) -> np.ndarray:
    """Per-relay transmit power under the normalized beamformer.

    Relay ``i`` scales its signal by ``conj(g_i) P_ri / sqrt(xi (1 + c_i^a))``
    with ``xi`` the sum of ``y_j P_rj`` over qualified relays, so its radiated
    power is ``P_ri * (y_i P_ri / xi)``, never above ``P_ri``. The factor
    cancels in the destination SNR.
    """
    p = harvested_relay_power(params, real.x)
    terms = real.y * p
    xi = terms.sum()
    if xi <= 0:
        return np.zeros_like(p)
    return p * terms / xi


def outage_event(snr, params: ScenarioParams):
    """True when the SNR cannot carry rate ``R`` over the two slots."""
    return np.asarray(snr) < params.tau


@dataclass
class TrialBatch:
    """Normalized gains for many trials; relays stored flat per trial.

    ``pick`` is a uniform draw per trial used only for random relay choice.
    """

    counts: np.ndarray
    x0: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    pick: np.ndarray

    @property
    def n_trials(self) -> int:
        return len(self.counts)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.counts)[:-1])).astype(np.int64)

    @property
    def trial_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_trials), self.counts)


def batch_snr(kind: StrategyKind, batch: TrialBatch, params: ScenarioParams) -> np.ndarray:
    """Destination SNR of every trial in ``batch`` under ``kind``.

    Trials without relays fall back to the direct link.
    """
    snr = params.power * batch.x0
    if kind is StrategyKind.DIRECT_ONLY:
        return snr
    has = batch.counts > 0
    if kind is StrategyKind.BEAMFORMING:
        inc = _relay_increment(params, batch.x, batch.y)
        return snr + np.bincount(batch.trial_index, weights=inc, minlength=batch.n_trials)
    offsets = batch.offsets
    if kind is StrategyKind.RANDOM_RELAY:
        local = np.minimum((batch.pick * batch.counts).astype(np.int64), batch.counts - 1)
        idx = offsets[has] + local[has]
    elif kind is StrategyKind.CLOSEST_RELAY:
        flat = np.arange(len(batch.r))
        order = np.lexsort((flat, batch.r, batch.trial_index))
        idx = order[offsets[has]]
    else:
        raise ValueError(f"unknown strategy {kind!r}")
    out = snr.copy()
    out[has] += _relay_increment(params, batch.x[idx], batch.y[idx])
    return out
