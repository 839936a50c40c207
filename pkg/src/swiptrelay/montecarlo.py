"""Monte Carlo outage estimation and diversity-slope fitting.

Trials are cut into fixed-size batches. Batch ``b`` draws from the Philox
stream keyed by ``(seed, lane)`` at counter block ``b``, and only integer
outage counts leave a batch, so an estimate is bit-identical whatever the
number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import ScenarioParams, path_gain
from .coalition import PayoffKind, Partition, form_coalitions, sample_multi_source, source_outages
from .geometry import Disc, PPPConfig, counter_rng, sample_relay_batch
from .strategies import StrategyKind, TrialBatch, batch_snr, outage_event

__all__ = [
    "Conditioning",
    "UNCONDITIONAL",
    "AT_LEAST_ONE",
    "fixed_count",
    "OutageEstimate",
    "SnrSweep",
    "draw_trial_batch",
    "estimate_outage",
    "estimate_outage_multi",
    "sweep_outage",
    "fit_slope",
    "diversity_slope",
    "default_workers",
    "BATCH_SIZE",
    "MultiSourceResult",
    "estimate_multi_source_outage",
]

BATCH_SIZE = 1 << 15


@dataclass(frozen=True)
class Conditioning:
    kind: str  # "unconditional" | "at-least-one" | "fixed"
    count: int | None = None

    def __post_init__(self):
        if self.kind not in ("unconditional", "at-least-one", "fixed"):
            raise ValueError(f"unknown conditioning {self.kind!r}")
        if self.kind == "fixed" and (self.count is None or self.count < 0):
            raise ValueError("fixed conditioning needs a relay count >= 0")

    def __str__(self) -> str:
        return f"fixed:{self.count}" if self.kind == "fixed" else self.kind

    @classmethod
    def parse(cls, text: str) -> "Conditioning":
        text = text.strip().lower()
        if text.startswith("fixed:"):
            return cls("fixed", int(text.split(":", 1)[1]))
        return cls(text)


UNCONDITIONAL = Conditioning("unconditional")
AT_LEAST_ONE = Conditioning("at-least-one")


def fixed_count(k: int) -> Conditioning:
    return Conditioning("fixed", k)


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    runs: int
    seed: int
    conditioning: Conditioning = UNCONDITIONAL
    events: int | None = None

    @classmethod
    def from_count(cls, events: int, runs: int, seed: int, conditioning=UNCONDITIONAL):
        p = events / runs
        return cls(p, math.sqrt(p * (1.0 - p) / runs), runs, seed, conditioning, int(events))


@dataclass
class SnrSweep:
    snr_db: np.ndarray
    estimates: list[OutageEstimate]
    strategy: StrategyKind | str
    params: ScenarioParams | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        if len(self.snr_db) != len(self.estimates):
            raise ValueError("one estimate per SNR point required")
        if np.any(np.diff(self.snr_db) <= 0):
            raise ValueError("SNR points must be strictly increasing")

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([e.p_hat for e in self.estimates])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([e.stderr for e in self.estimates])


def default_workers() -> int:
    return max(1, int(os.environ.get("SWIPT_WORKERS", "1")))


def draw_trial_batch(
    params: ScenarioParams,
    disc: Disc,
    ppp: PPPConfig,
    n_trials: int,
    rng: np.random.Generator,
    conditioning: Conditioning = UNCONDITIONAL,
) -> TrialBatch:
    """Placement and fading for ``n_trials`` trials, always in the same draw order."""
    relays = sample_relay_batch(
        disc,
        ppp,
        n_trials,
        rng,
        fixed_count=conditioning.count if conditioning.kind == "fixed" else None,
        at_least_one=conditioning.kind == "at-least-one",
    )
    n_relays = len(relays.r)
    h2 = rng.exponential(size=n_relays)
    g2 = rng.exponential(size=n_relays)
    hd2 = rng.exponential(size=n_trials)
    pick = rng.random(n_trials)
    a = params.alpha
    return TrialBatch(
        counts=relays.counts,
        x0=hd2 * path_gain(disc.dest_distance, a),
        x=h2 * path_gain(relays.r, a),
        y=g2 * path_gain(relays.c, a),
        r=relays.r,
        pick=pick,
    )


def _check_conditioning(strategies: Iterable[StrategyKind], conditioning: Conditioning):
    if conditioning.kind == "fixed" and conditioning.count == 0:
        bad = [s.value for s in strategies if s.needs_relay]
        if bad:
            raise ValueError(f"fixed:0 leaves no relay for strategies {bad}")


def _batch_counts(task) -> list[int]:
    params, disc, ppp, strategies, conditioning, seed, lane, index, size = task
    rng = counter_rng(seed, index, lane)
    batch = draw_trial_batch(params, disc, ppp, size, rng, conditioning)
    return [int(outage_event(batch_snr(s, batch, params), params).sum()) for s in strategies]


def _map(fn, tasks: list, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _batches(runs: int, batch_size: int):
    n = -(-runs // batch_size)
    return [(b, min(batch_size, runs - b * batch_size)) for b in range(n)]


def estimate_outage_multi(
    params: ScenarioParams,
    disc: Disc,
    ppp: PPPConfig,
    strategies: Sequence[StrategyKind],
    conditioning: Conditioning = UNCONDITIONAL,
    runs: int = 100_000,
    seed: int = 0,
    *,
    workers: int | None = None,
    batch_size: int = BATCH_SIZE,
    lane: int = 0,
) -> dict[StrategyKind, OutageEstimate]:
    """Outage of several strategies evaluated on the same realizations."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    strategies = list(strategies)
    _check_conditioning(strategies, conditioning)
    workers = default_workers() if workers is None else workers
    tasks = [
        (params, disc, ppp, strategies, conditioning, seed, lane, b, size)
        for b, size in _batches(runs, batch_size)
    ]
    totals = np.zeros(len(strategies), dtype=np.int64)
    for counts in _map(_batch_counts, tasks, workers):
        totals += counts
    return {
        s: OutageEstimate.from_count(int(k), runs, seed, conditioning)
        for s, k in zip(strategies, totals)
    }


_LANES = {kind: i + 1 for i, kind in enumerate(StrategyKind)}


def estimate_outage(
    params: ScenarioParams,
    disc: Disc,
    ppp: PPPConfig,
    strategy: StrategyKind,
    conditioning: Conditioning = UNCONDITIONAL,
    runs: int = 100_000,
    seed: int = 0,
    *,
    workers: int | None = None,
    common_random_numbers: bool = False,
    batch_size: int = BATCH_SIZE,
) -> OutageEstimate:
    """Monte Carlo outage probability of one strategy.

    With ``common_random_numbers`` every strategy run under the same seed
    sees identical placements and fading; otherwise each strategy draws from
    its own stream.
    """
    lane = 0 if common_random_numbers else _LANES[strategy]
    out = estimate_outage_multi(
        params, disc, ppp, [strategy], conditioning, runs, seed,
        workers=workers, batch_size=batch_size, lane=lane,
    )
    return out[strategy]


def sweep_outage(
    params: ScenarioParams,
    disc: Disc,
    ppp: PPPConfig,
    strategies: Sequence[StrategyKind],
    snr_db: Sequence[float],
    conditioning: Conditioning = UNCONDITIONAL,
    runs: int = 100_000,
    seed: int = 0,
    *,
    workers: int | None = None,
) -> dict[StrategyKind, SnrSweep]:
    """Outage versus SNR; all strategies and SNR points share one seed."""
    snr_db = [float(s) for s in snr_db]
    rows = [
        estimate_outage_multi(
            params.with_power(float(10 ** (s / 10))), disc, ppp, strategies,
            conditioning, runs, seed, workers=workers,
        )
        for s in snr_db
    ]
    return {
        k: SnrSweep(np.array(snr_db), [row[k] for row in rows], k, params)
        for k in strategies
    }


def fit_slope(snr_db, p) -> float:
    """Least-squares slope of ``-log10 p`` against ``log10 P``."""
    log_p = np.asarray(snr_db, dtype=float) / 10.0
    y = -np.log10(np.asarray(p, dtype=float))
    slope = np.polyfit(log_p, y, 1)[0]
    return float(slope)


def diversity_slope(sweep: SnrSweep, window: tuple[float, float]) -> float:
    """Fitted diversity order over the SNR window ``[lo, hi]`` dB.

    Points with zero estimated outage are skipped; at least three non-zero
    points must remain.
    """
    lo, hi = window
    sel = (sweep.snr_db >= lo) & (sweep.snr_db <= hi)
    p = sweep.p_hat[sel]
    if not np.any(p > 0):
        raise ValueError(f"no outage events in window {window}; raise the run count")
    keep = p > 0
    if keep.sum() < 3:
        raise ValueError(f"need >= 3 non-zero points in window {window}, got {keep.sum()}")
    return fit_slope(sweep.snr_db[sel][keep], p[keep])


# --------------------------------------------------------------------------
# multi-source coalition game

MULTI_SOURCE_LANE = 7


@dataclass
class MultiSourceResult:
    kind: PayoffKind
    outage: OutageEstimate
    mean_sweeps: float
    mean_trace: np.ndarray  # mean total value: initial, then after each sweep


def _multi_batch(task):
    layout, params, n_relays, kappa, kinds, seed, index, size, max_sweeps = task
    rng = counter_rng(seed, index, MULTI_SOURCE_LANE)
    out = {k: {"frac": [], "events": 0, "sweeps": 0, "traces": []} for k in kinds}
    for _ in range(size):
        sc = sample_multi_source(layout, params, n_relays, kappa, rng)
        start = Partition(tuple(rng.integers(0, layout.n_sources, n_relays)), layout.n_sources)
        for k in kinds:
            part, trace = form_coalitions(sc, k, start, max_sweeps=max_sweeps)
            flags = source_outages(sc, part, params.tau)
            acc = out[k]
            acc["frac"].append(sum(flags) / len(flags))
            acc["events"] += sum(flags)
            acc["sweeps"] += trace.sweeps
            acc["traces"].append([trace.initial_value] + trace.sweep_values)
    return out


def estimate_multi_source_outage(
    layout,
    params: ScenarioParams,
    n_relays: int,
    kappa: float,
    kinds: Sequence,
    draws: int = 10_000,
    seed: int = 0,
    *,
    workers: int | None = None,
    batch_size: int = 250,
    max_sweeps: int = 100,
) -> dict:
    """Per-source outage after coalition formation, averaged over sources and draws.

    A source is in outage when its coalition SNR is below ``tau``. Every
    payoff kind plays on the same scenarios from the same random start, and
    scenarios do not depend on ``kappa`` or ``P``, so sweeps over either use
    matched draws. The standard error is taken over per-draw outage fractions
    because sources in one draw share relays.
    """
    if draws < 2:
        raise ValueError("need at least two scenario draws")
    kinds = list(kinds)
    workers = default_workers() if workers is None else workers
    tasks = [
        (layout, params, n_relays, kappa, kinds, seed, b, size, max_sweeps)
        for b, size in _batches(draws, batch_size)
    ]
    parts = _map(_multi_batch, tasks, workers)
    results = {}
    for k in kinds:
        frac = np.concatenate([np.asarray(p[k]["frac"]) for p in parts])
        traces = [t for p in parts for t in p[k]["traces"]]
        width = max(len(t) for t in traces)
        padded = np.array([t + [t[-1]] * (width - len(t)) for t in traces])
        p_hat = float(frac.mean())
        stderr = float(frac.std(ddof=1) / math.sqrt(draws))
        est = OutageEstimate(
            p_hat, stderr, draws, seed, fixed_count(n_relays),
            int(sum(p[k]["events"] for p in parts)),
        )
        results[k] = MultiSourceResult(
            k, est, sum(p[k]["sweeps"] for p in parts) / draws, padded.mean(axis=0)
        )
    return results
