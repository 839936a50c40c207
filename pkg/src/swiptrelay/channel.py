"""Bounded path loss, power splitting and harvested relay power.

Noise variance is normalized to one, so the transmit power ``P`` doubles as
the transmit SNR and the decode threshold on a normalized gain is
``epsilon = tau / P``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ScenarioParams",
    "path_gain",
    "splitting_coefficient",
    "harvested_relay_power",
    "decodes",
    "db_to_linear",
]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class ScenarioParams:
    """Physical constants of one run.

    ``slot`` (the time-slot length) is carried for completeness only: the
    harvested energy is spent over a half slot, so it cancels.
    """

    power: float
    rate: float
    alpha: float = 2.0
    eta: float = 0.5
    slot: float = 1.0

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError(f"transmit power must be positive, got {self.power}")
        if not self.rate >= 0:
            raise ValueError(f"target rate must be >= 0, got {self.rate}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"harvesting efficiency must lie in (0, 1], got {self.eta}")
        if not self.alpha > 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.alpha}")

    @classmethod
    def from_db(cls, snr_db: float, **kwargs) -> "ScenarioParams":
        return cls(power=float(db_to_linear(snr_db)), **kwargs)

    @property
    def tau(self) -> float:
        return 2.0 ** (2.0 * self.rate) - 1.0

    @property
    def epsilon(self) -> float:
        return self.tau / self.power

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.power)

    def with_power(self, power: float) -> "ScenarioParams":
        return replace(self, power=power)


def path_gain(distance, alpha):
    """``1 / (1 + distance**alpha)``; never exceeds one."""
    return 1.0 / (1.0 + np.asarray(distance, dtype=float) ** alpha)


def splitting_coefficient(params: ScenarioParams, h2, d_i):
    """Fraction of the relay observation routed to the harvester.

    The detector keeps just enough signal to decode at rate ``R``; a relay
    whose whole observation is insufficient harvests nothing.
    """
    h2 = np.asarray(h2, dtype=float)
    tau = params.tau
    if tau == 0:
        return np.ones_like(h2)[()]
    need = (1.0 + np.asarray(d_i, dtype=float) ** params.alpha) * tau
    with np.errstate(divide="ignore"):
        theta = 1.0 - need / (params.power * h2)
    return np.maximum(theta, 0.0)[()]


def decodes(params: ScenarioParams, x):
    """Strict decode test ``x > epsilon``; the boundary counts as failure."""
    return np.asarray(x) > params.epsilon


def harvested_relay_power(params: ScenarioParams, x):
    """Relay transmit power ``eta * (x * P - tau)`` after a successful decode."""
    x = np.asarray(x, dtype=float)
    p = params.eta * (x * params.power - params.tau)
    return np.where(x > params.epsilon, p, 0.0)[()]
