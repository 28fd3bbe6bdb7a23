"""
Forward evolution over a fixed event log.

The two-type process and the coupled single-type processes are read off the
same log: a death empties its site; an arrow x -> y fills a vacant y with the
type at x, except that a 2-only arrow never carries a 1.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graphical import EventKind, EventLog
from .topology import Topology, bfs_distances

logger = logging.getLogger(__name__)

DEATH = int(EventKind.DEATH)


class Configuration:
    """
    A state in {0, 1, 2} for every site.

    Serializes as a string over {0,1,2} in site-id order.
    """

    __slots__ = ("states",)

    def __init__(self, states: Iterable[int]):
        arr = np.asarray(list(states) if not isinstance(states, np.ndarray) else states)
        arr = arr.astype(np.int8, copy=True).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() > 2):
            raise ValueError("Configuration states must be 0, 1 or 2")
        self.states = arr

    @classmethod
    def zeros(cls, n: int) -> "Configuration":
        return cls(np.zeros(n, dtype=np.int8))

    @classmethod
    def uniform(cls, n: int, state: int) -> "Configuration":
        return cls(np.full(n, state, dtype=np.int8))

    @classmethod
    def from_string(cls, text: str) -> "Configuration":
        if any(ch not in "012" for ch in text):
            raise ValueError(f"Configuration string must use 0/1/2 only: {text!r}")
        return cls([int(ch) for ch in text])

    @classmethod
    def from_sites(
        cls,
        n: int,
        ones: Iterable[int] = (),
        twos: Iterable[int] = (),
    ) -> "Configuration":
        states = np.zeros(n, dtype=np.int8)
        ones, twos = set(ones), set(twos)
        if ones & twos:
            raise ValueError(f"Sites marked both 1 and 2: {sorted(ones & twos)}")
        for x in ones:
            states[x] = 1
        for x in twos:
            states[x] = 2
        return cls(states)

    def __len__(self) -> int:
        return int(self.states.size)

    def __getitem__(self, x: int) -> int:
        return int(self.states[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return bool(np.array_equal(self.states, other.states))

    def __hash__(self) -> int:
        return hash(self.states.tobytes())

    def __repr__(self) -> str:
        return f"Configuration({self.to_string()!r})"

    def ones(self) -> FrozenSet[int]:
        return frozenset(np.flatnonzero(self.states == 1).tolist())

    def twos(self) -> FrozenSet[int]:
        return frozenset(np.flatnonzero(self.states == 2).tolist())

    def occupied(self) -> FrozenSet[int]:
        return frozenset(np.flatnonzero(self.states != 0).tolist())

    def to_string(self) -> str:
        return "".join(str(int(v)) for v in self.states)


@dataclass
class Trajectory:
    """Configurations at increasing sample times from one forward sweep."""
    times: List[float]
    configurations: List[Configuration]
    seed: int
    log_identity: str


@dataclass
class SingleTypeHistory:
    """Summary of one single-type run from a seed set."""
    extinction_time: Optional[float]  # None if still alive at t_max
    final: FrozenSet[int]  # occupied set at t_max
    max_radius: int  # farthest distance from the seed set ever occupied
    watch_hit: bool  # watch site occupied at some time in [watch_from, t_max]
    t_max: float

    @property
    def survived(self) -> bool:
        return self.extinction_time is None

    def alive_at(self, t: float) -> bool:
        return self.extinction_time is None or self.extinction_time > t


def _check_inputs(topo: Topology, log: EventLog, n: int, t: float, t0: float = 0.0) -> None:
    if log.topo.site_count != topo.site_count:
        raise ValueError("Event log was sampled on a different topology")
    if n != topo.site_count:
        raise ValueError(f"Configuration has {n} sites, topology has {topo.site_count}")
    if t > log.horizon:
        raise ValueError(f"t={t} beyond log horizon {log.horizon}")
    if t < t0:
        raise ValueError(f"t={t} before start time {t0}")


def _sweep(states: List[int], log: EventLog, lo: int, hi: int) -> None:
    """Apply events lo..hi-1 to a two-type state list in place."""
    _, kinds, sources, targets, two_only = log.columns
    for i in range(lo, hi):
        src = sources[i]
        if kinds[i] == DEATH:
            states[src] = 0
            continue
        s = states[src]
        if s == 0:
            continue
        dst = targets[i]
        if states[dst] != 0 or (s == 1 and two_only[i]):
            continue
        states[dst] = s


def evolve(
    topo: Topology,
    log: EventLog,
    xi0: Configuration,
    t: float,
    t0: float = 0.0,
) -> Configuration:
    """
    Configuration at time t given xi0 at time t0, reading events in (t0, t].

    Args:
        topo: Topology
        log: Event log
        xi0: Configuration at t0
        t: Target time (<= horizon)
        t0: Start time (default 0)

    Returns:
        Configuration at t

    Raises:
        ValueError: t beyond horizon, or xi0 on the wrong topology
    """
    _check_inputs(topo, log, len(xi0), t, t0)
    states = xi0.states.tolist()
    lo, hi = log.index_range(t0, t)
    _sweep(states, log, lo, hi)
    return Configuration(states)


def evolve_single(
    topo: Topology,
    log: EventLog,
    A0: Iterable[int],
    t: float,
    kind: int,
    t0: float = 0.0,
) -> FrozenSet[int]:
    """
    Occupied set at t of the single-type process zeta^{kind, A0}.

    kind=1 follows unlabeled arrows only (rate lambda1); kind=2 follows all
    arrows (rate lambda2). Equals the set of endpoints of kind-paths up from A0.
    """
    if kind not in (1, 2):
        raise ValueError(f"kind must be 1 or 2, got {kind}")
    _check_inputs(topo, log, topo.site_count, t, t0)

    occupied = [False] * topo.site_count
    for x in A0:
        occupied[topo.check_site(x)] = True

    _, kinds, sources, targets, two_only = log.columns
    lo, hi = log.index_range(t0, t)
    for i in range(lo, hi):
        src = sources[i]
        if kinds[i] == DEATH:
            occupied[src] = False
        elif occupied[src] and not (kind == 1 and two_only[i]):
            occupied[targets[i]] = True
    return frozenset(x for x, occ in enumerate(occupied) if occ)


def trajectory(
    topo: Topology,
    log: EventLog,
    xi0: Configuration,
    sample_times: Sequence[float],
) -> Trajectory:
    """
    Configurations at each sample time from a single forward sweep.

    Raises:
        ValueError: Unsorted or out-of-range sample times
    """
    times = [float(s) for s in sample_times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("Sample times must be sorted")
    if times and times[0] < 0:
        raise ValueError("Sample times must be nonnegative")
    if times:
        _check_inputs(topo, log, len(xi0), times[-1])

    states = xi0.states.tolist()
    configs: List[Configuration] = []
    position = 0.0
    extinct = not any(states)
    for s in times:
        if not extinct:
            lo, hi = log.index_range(position, s)
            _sweep(states, log, lo, hi)
            extinct = not any(states)
        position = s
        configs.append(Configuration(states))
    return Trajectory(times=times, configurations=configs, seed=log.seed, log_identity=log.identity)


def count_types(xi: Configuration) -> Tuple[int, int, int]:
    """(n0, n1, n2) = number of vacant, type-1 and type-2 sites."""
    counts = np.bincount(xi.states, minlength=3)
    return int(counts[0]), int(counts[1]), int(counts[2])


def single_type_history(
    topo: Topology,
    log: EventLog,
    A0: Iterable[int],
    t_max: float,
    kind: int = 2,
    watch_site: Optional[int] = None,
    watch_from: float = 0.0,
) -> SingleTypeHistory:
    """
    Run zeta^{kind, A0} to t_max recording lifetime, radius and returns to a site.

    Stops as soon as the process dies out.

    Args:
        topo: Topology
        log: Event log
        A0: Seed set
        t_max: Horizon of the run (<= log horizon)
        kind: 1 (unlabeled arrows only) or 2 (all arrows)
        watch_site: Site whose occupation during [watch_from, t_max] is recorded
        watch_from: Start of the watch window
    """
    if kind not in (1, 2):
        raise ValueError(f"kind must be 1 or 2, got {kind}")
    _check_inputs(topo, log, topo.site_count, t_max)

    seeds = {topo.check_site(x) for x in A0}
    occupied = [False] * topo.site_count
    for x in seeds:
        occupied[x] = True
    alive = len(seeds)
    if alive == 0:
        return SingleTypeHistory(0.0, frozenset(), 0, False, t_max)

    dist = bfs_distances(topo, seeds).tolist()
    max_radius = 0
    watch_hit = watch_site is not None and watch_from <= 0.0 and occupied[watch_site]

    times, kinds, sources, targets, two_only = log.columns
    _, hi = log.index_range(0.0, t_max)
    watching = watch_site is not None and not watch_hit
    pending = watching  # state at watch_from not inspected yet
    for i in range(hi):
        if pending and times[i] > watch_from:
            pending = False
            if occupied[watch_site]:
                watch_hit = True
                watching = False
        src = sources[i]
        if kinds[i] == DEATH:
            if occupied[src]:
                occupied[src] = False
                alive -= 1
                if alive == 0:
                    return SingleTypeHistory(times[i], frozenset(), max_radius, watch_hit, t_max)
            continue
        if not occupied[src] or (kind == 1 and two_only[i]):
            continue
        dst = targets[i]
        if occupied[dst]:
            continue
        occupied[dst] = True
        alive += 1
        if dist[dst] > max_radius:
            max_radius = dist[dst]
        if watching and dst == watch_site and times[i] >= watch_from:
            watch_hit = True
            watching = False

    if pending and occupied[watch_site]:
        watch_hit = True
    final = frozenset(x for x, occ in enumerate(occupied) if occ)
    return SingleTypeHistory(None, final, max_radius, watch_hit, t_max)
