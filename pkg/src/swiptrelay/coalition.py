"""Relay coalition formation among several sources.

Each relay joins exactly one source's coalition and beamforms that source's
message when it can decode it. A relay's payoff is either its absolute SNR
increment or that increment relative to the coalition SNR, less a cost of
``kappa`` per qualified coalition member. Relays move one at a time when a
move raises their own payoff (C1) and the joint value of the two affected
coalitions (C2).

The arithmetic is plain Python, so contributions given as
:class:`fractions.Fraction` give exact results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channel import ScenarioParams, harvested_relay_power, path_gain

__all__ = [
    "PayoffKind",
    "MultiSourceLayout",
    "MultiSourceScenario",
    "Coalition",
    "Partition",
    "FormationTrace",
    "NotConvergedError",
    "four_source_layout",
    "sample_multi_source",
    "relay_power_for_source",
    "coalition_snr",
    "coalition_cost",
    "payoff",
    "coalition_value",
    "prefers",
    "form_coalitions",
    "is_nash_stable",
    "source_outages",
    "total_value",
]


class PayoffKind(enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class MultiSourceLayout:
    sources: np.ndarray  # (M, 2)
    destination: np.ndarray  # (2,)
    center: np.ndarray  # (2,) disc centre
    radius: float

    @property
    def n_sources(self) -> int:
        return len(self.sources)


def four_source_layout(radius: float = 5.0, dest_distance: float = 10.0) -> MultiSourceLayout:
    """Four sources around the centre of a disc at ``(R, R)``, destination to the east."""
    r = radius
    sources = np.array([[r / 2, r], [r, r / 2], [3 * r / 2, r], [r, 3 * r / 2]])
    return MultiSourceLayout(sources, np.array([r + dest_distance, r]), np.array([r, r]), r)


@dataclass
class MultiSourceScenario:
    """Everything the game needs, reduced to per-link SNR terms.

    ``direct[m]`` is the direct-link SNR of source ``m``; ``power[m][i]`` the
    power relay ``i`` harvests from source ``m``; ``relay_gain[i]`` the
    normalized relay-destination gain; ``qualified[m][i]`` whether relay ``i``
    decodes source ``m``.
    """

    direct: list
    power: list
    relay_gain: list
    kappa: float = 0
    qualified: list | None = None
    params: ScenarioParams | None = None
    source_gain: list | None = None  # normalized |h_mi|^2/(1+d_mi^a)
    contribution: list = field(init=False)

    def __post_init__(self):
        self.direct = list(self.direct)
        self.power = [list(row) for row in self.power]
        self.relay_gain = list(self.relay_gain)
        if len(self.power) != len(self.direct):
            raise ValueError("one row of relay powers per source required")
        if any(len(row) != len(self.relay_gain) for row in self.power):
            raise ValueError("relay power rows must have one entry per relay")
        if not self.direct:
            raise ValueError("at least one source required")
        if self.kappa < 0:
            raise ValueError("cost coefficient must be >= 0")
        if self.qualified is None:
            self.qualified = [[p > 0 for p in row] for row in self.power]
        self.contribution = [
            [p * g for p, g in zip(row, self.relay_gain)] for row in self.power
        ]

    @property
    def n_sources(self) -> int:
        return len(self.direct)

    @property
    def n_relays(self) -> int:
        return len(self.relay_gain)

    @classmethod
    def from_contributions(cls, direct, contribution, kappa=0, qualified=None):
        """Scenario defined directly by the relay SNR contributions."""
        n = len(contribution[0]) if contribution else 0
        return cls(direct, contribution, [1] * n, kappa, qualified)


def sample_multi_source(
    layout: MultiSourceLayout,
    params: ScenarioParams,
    n_relays: int,
    kappa: float,
    rng: np.random.Generator,
) -> MultiSourceScenario:
    """Relays uniform on the disc, Rayleigh fading on every link."""
    m = layout.n_sources
    rr = layout.radius * np.sqrt(rng.random(n_relays))
    ang = 2 * np.pi * rng.random(n_relays)
    relays = layout.center + np.column_stack((rr * np.cos(ang), rr * np.sin(ang)))
    h = rng.exponential(size=(m, n_relays))
    g = rng.exponential(size=n_relays)
    hd = rng.exponential(size=m)
    return _build_scenario(layout, params, relays, h, g, hd, kappa)


def _build_scenario(layout, params, relays, h, g, hd, kappa):
    a = params.alpha
    d_mi = np.linalg.norm(layout.sources[:, None, :] - relays[None, :, :], axis=-1)
    c_i = np.linalg.norm(relays - layout.destination, axis=-1)
    d_0m = np.linalg.norm(layout.sources - layout.destination, axis=-1)
    x = h * path_gain(d_mi, a)
    power = harvested_relay_power(params, x)
    return MultiSourceScenario(
        direct=(params.power * hd * path_gain(d_0m, a)).tolist(),
        power=np.atleast_2d(power).tolist(),
        relay_gain=(g * path_gain(c_i, a)).tolist(),
        kappa=kappa,
        qualified=(x > params.epsilon).tolist(),
        params=params,
        source_gain=x.tolist(),
    )


def relay_power_for_source(scenario: MultiSourceScenario, m: int, i: int):
    return scenario.power[m][i]


@dataclass(frozen=True)
class Coalition:
    source: int
    members: frozenset

    def __init__(self, source: int, members=()):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "members", frozenset(members))

    def without(self, i: int) -> "Coalition":
        return Coalition(self.source, self.members - {i})

    def with_(self, i: int) -> "Coalition":
        return Coalition(self.source, self.members | {i})


def _stats(sc: MultiSourceScenario, m: int, members):
    row, qual = sc.contribution[m], sc.qualified[m]
    ordered = sorted(members)
    total = sum((row[j] for j in ordered), 0)
    n_qual = sum(1 for j in ordered if qual[j])
    return total, n_qual, len(ordered)


def _value(sc: MultiSourceScenario, m: int, members, kind: PayoffKind):
    total, n_qual, n = _stats(sc, m, members)
    cost = sc.kappa * n_qual
    if kind is PayoffKind.ABSOLUTE:
        return total - n * cost
    snr = sc.direct[m] + total
    share = total / snr if snr != 0 else 0
    return share - n * cost


def _payoff(sc: MultiSourceScenario, i: int, m: int, members, kind: PayoffKind):
    total, n_qual, _ = _stats(sc, m, members)
    cost = sc.kappa * n_qual
    gain = sc.contribution[m][i]
    if kind is PayoffKind.ABSOLUTE:
        return gain - cost
    snr = sc.direct[m] + total
    return (gain / snr if snr != 0 else 0) - cost


def coalition_snr(sc: MultiSourceScenario, coalition: Coalition):
    total, _, _ = _stats(sc, coalition.source, coalition.members)
    return sc.direct[coalition.source] + total


def coalition_cost(sc: MultiSourceScenario, coalition: Coalition):
    """``kappa`` times the number of members able to decode the source."""
    _, n_qual, _ = _stats(sc, coalition.source, coalition.members)
    return sc.kappa * n_qual


def payoff(sc: MultiSourceScenario, i: int, coalition: Coalition, kind: PayoffKind):
    """Payoff of member ``i``.

    The SNR increment of relay ``i`` is its own contribution, since the
    coalition SNR is a sum. A relative payoff in a zero-SNR coalition is taken
    as zero before the cost.
    """
    if i not in coalition.members:
        raise ValueError(f"relay {i} is not a member of coalition {coalition.source}")
    return _payoff(sc, i, coalition.source, coalition.members, kind)


def coalition_value(sc: MultiSourceScenario, coalition: Coalition, kind: PayoffKind):
    return _value(sc, coalition.source, coalition.members, kind)


def _prefers(sc, i, m, from_members, n, to_members, kind):
    """C1 and C2 for relay ``i`` moving from source ``m`` to source ``n``.

    ``to_members`` excludes ``i``; the target side is evaluated with ``i`` added.
    Returns (prefers, payoff in target).
    """
    to_with = set(to_members) | {i}
    from_without = set(from_members) - {i}
    phi_here = _payoff(sc, i, m, from_members, kind)
    phi_there = _payoff(sc, i, n, to_with, kind)
    if not phi_here < phi_there:
        return False, phi_there
    before = _value(sc, m, from_members, kind) + _value(sc, n, to_members, kind)
    after = _value(sc, m, from_without, kind) + _value(sc, n, to_with, kind)
    return before < after, phi_there


def prefers(
    sc: MultiSourceScenario, i: int, from_: Coalition, to: Coalition, kind: PayoffKind
) -> bool:
    """Whether relay ``i`` strictly prefers leaving ``from_`` for ``to``."""
    if i not in from_.members:
        raise ValueError(f"relay {i} is not in the coalition it would leave")
    if i in to.members or to.source == from_.source:
        raise ValueError("target coalition must be a different coalition without the relay")
    ok, _ = _prefers(sc, i, from_.source, from_.members, to.source, to.members, kind)
    return ok


@dataclass
class Partition:
    """Assignment of every relay to one source: ``owner[i]`` is relay ``i``'s source."""

    owner: tuple
    n_sources: int

    def __post_init__(self):
        self.owner = tuple(int(o) for o in self.owner)
        if any(not 0 <= o < self.n_sources for o in self.owner):
            raise ValueError("relay assigned to a non-existent source")

    def members(self, m: int) -> set:
        return {i for i, o in enumerate(self.owner) if o == m}

    def coalitions(self) -> list[Coalition]:
        return [Coalition(m, self.members(m)) for m in range(self.n_sources)]

    def sizes(self) -> list[int]:
        """Coalition sizes counting the source itself; they sum to N + M."""
        return [1 + len(self.members(m)) for m in range(self.n_sources)]


@dataclass
class FormationTrace:
    sweep_values: list = field(default_factory=list)  # total value after each sweep
    move_values: list = field(default_factory=list)  # total value after each move
    moves: list = field(default_factory=list)  # (relay, from, to)
    initial_value: float = 0.0

    @property
    def sweeps(self) -> int:
        return len(self.sweep_values)


class NotConvergedError(RuntimeError):
    def __init__(self, partition: Partition, trace: FormationTrace):
        super().__init__(f"no stable partition after {trace.sweeps} sweeps")
        self.partition = partition
        self.trace = trace


def _sum(values):
    # correctly rounded float sum keeps the value trace monotone under C2
    if any(isinstance(v, Fraction) for v in values):
        return sum(values)
    return math.fsum(values)


def total_value(sc: MultiSourceScenario, partition: Partition, kind: PayoffKind):
    return _sum([_value(sc, m, partition.members(m), kind) for m in range(sc.n_sources)])


def form_coalitions(
    sc: MultiSourceScenario,
    kind: PayoffKind,
    initial: Partition | None = None,
    rng: np.random.Generator | None = None,
    max_sweeps: int = 100,
) -> tuple[Partition, FormationTrace]:
    """Run round-robin relay moves until a sweep changes nothing.

    Relays take turns in ascending index order. A relay moves to the
    coalition with the highest target payoff among those it strictly prefers,
    the lowest source index winning ties. Without ``initial`` the relays start
    randomly assigned using ``rng``.
    """
    n_src, n_rel = sc.n_sources, sc.n_relays
    if initial is None:
        rng = rng if rng is not None else np.random.default_rng()
        initial = Partition(tuple(rng.integers(0, n_src, n_rel)), n_src)
    if len(initial.owner) != n_rel or initial.n_sources != n_src:
        raise ValueError("initial partition does not match the scenario")
    owner = list(initial.owner)
    groups = [set() for _ in range(n_src)]
    for i, m in enumerate(owner):
        groups[m].add(i)
    trace = FormationTrace()

    def current_total():
        return _sum([_value(sc, m, groups[m], kind) for m in range(n_src)])

    trace.initial_value = current_total()
    for _ in range(max_sweeps):
        moved = False
        for i in range(n_rel):
            m = owner[i]
            best, best_phi = None, None
            for n in range(n_src):
                if n == m:
                    continue
                ok, phi = _prefers(sc, i, m, groups[m], n, groups[n], kind)
                if ok and (best is None or phi > best_phi):
                    best, best_phi = n, phi
            if best is not None:
                groups[m].discard(i)
                groups[best].add(i)
                owner[i] = best
                moved = True
                trace.moves.append((i, m, best))
                trace.move_values.append(current_total())
        trace.sweep_values.append(current_total())
        if not moved:
            return Partition(tuple(owner), n_src), trace
    raise NotConvergedError(Partition(tuple(owner), n_src), trace)


def is_nash_stable(sc: MultiSourceScenario, partition: Partition, kind: PayoffKind) -> bool:
    """No relay strictly prefers any other coalition."""
    groups = [partition.members(m) for m in range(sc.n_sources)]
    for i, m in enumerate(partition.owner):
        for n in range(sc.n_sources):
            if n != m and _prefers(sc, i, m, groups[m], n, groups[n], kind)[0]:
                return False
    return True


def source_outages(sc: MultiSourceScenario, partition: Partition, tau: float) -> list[bool]:
    """Per-source outage flags: coalition SNR below ``tau``."""
    return [
        coalition_snr(sc, Coalition(m, partition.members(m))) < tau
        for m in range(sc.n_sources)
    ]
