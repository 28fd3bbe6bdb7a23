"""
Graphical construction: Poisson death marks and birth arrows on a finite window.

A log materializes every event on (0, T] once, so forward evolution and the
reverse-time duals read the same realization. Deaths arrive at rate 1 per
site, arrows at rate lambda2 per directed edge, and each arrow is labeled
2-only with probability 1 - lambda1/lambda2.
"""

import hashlib
import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core.rng import StreamFamily, stream
from .topology import Topology, TopologyKind, describe, from_description

logger = logging.getLogger(__name__)


class EventKind(IntEnum):
    """Event type code stored in the log."""
    DEATH = 0
    ARROW = 1


class Direction(str, Enum):
    """Traversal direction of a cursor."""
    FORWARD = "forward"
    REVERSE = "reverse"


@dataclass(frozen=True)
class Event:
    """A single death mark or arrow."""
    time: float
    kind: EventKind
    site: int  # death site, or arrow source
    target: int = -1  # arrow target
    two_only: bool = False


@dataclass(frozen=True, eq=False)
class EventLog:
    """
    One realization of all Poisson event streams on (0, horizon].

    Events are kept merged and sorted by time in parallel arrays; per-stream
    views are derived. Timestamps are pairwise distinct.
    """
    topo: Topology
    horizon: float
    lambda1: float
    lambda2: float
    seed: int
    times: np.ndarray
    kinds: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    two_only: np.ndarray

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @cached_property
    def columns(self) -> Tuple[List[float], List[int], List[int], List[int], List[bool]]:
        """Plain-list copy of the arrays for tight Python loops."""
        return (
            self.times.tolist(),
            self.kinds.tolist(),
            self.sources.tolist(),
            self.targets.tolist(),
            self.two_only.tolist(),
        )

    @cached_property
    def identity(self) -> str:
        """Short digest identifying this realization."""
        h = hashlib.sha1()
        for arr in (self.times, self.kinds, self.sources, self.targets, self.two_only):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def index_range(self, t0: float, t1: float) -> Tuple[int, int]:
        """Index range of events with t0 < time <= t1."""
        lo = int(np.searchsorted(self.times, t0, side="right"))
        hi = int(np.searchsorted(self.times, t1, side="right"))
        return lo, max(lo, hi)

    def deaths(self, x: int) -> np.ndarray:
        """Death times at site x, increasing."""
        mask = (self.kinds == EventKind.DEATH) & (self.sources == x)
        return self.times[mask]

    def arrows(self, x: int, y: int) -> Tuple[np.ndarray, np.ndarray]:
        """Arrow times and 2-only flags on the directed edge x -> y."""
        mask = (self.kinds == EventKind.ARROW) & (self.sources == x) & (self.targets == y)
        return self.times[mask], self.two_only[mask]

    def event(self, i: int) -> Event:
        kind = EventKind(int(self.kinds[i]))
        return Event(
            time=float(self.times[i]),
            kind=kind,
            site=int(self.sources[i]),
            target=int(self.targets[i]),
            two_only=bool(self.two_only[i]),
        )

    def events(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self.event(i)

    @classmethod
    def from_events(
        cls,
        topo: Topology,
        events: Iterable[Event],
        horizon: float,
        lambda1: float,
        lambda2: float,
        seed: int = 0,
    ) -> "EventLog":
        """
        Build a log from an explicit event list (hand-made fragments, replays).

        Raises:
            ValueError: On times outside (0, horizon], repeated timestamps,
                arrows along non-edges, or labels that the rates forbid
        """
        _check_rates(lambda1, lambda2, allow_zero=True)
        if horizon <= 0:
            raise ValueError(f"Horizon must be positive, got {horizon}")

        evs = sorted(events, key=lambda e: e.time)
        edge_index = topo.edge_index
        for e in evs:
            if not 0.0 < e.time <= horizon:
                raise ValueError(f"Event time {e.time} outside (0, {horizon}]")
            topo.check_site(e.site)
            if e.kind is EventKind.ARROW:
                if (e.site, e.target) not in edge_index:
                    raise ValueError(f"No edge {e.site}->{e.target} in topology")
                if e.two_only and lambda1 == lambda2:
                    raise ValueError("2-only arrows require lambda1 < lambda2")
        times = np.asarray([e.time for e in evs], dtype=np.float64)
        if np.any(np.diff(times) == 0):
            raise ValueError("Event timestamps must be pairwise distinct")

        return cls(
            topo=topo,
            horizon=float(horizon),
            lambda1=float(lambda1),
            lambda2=float(lambda2),
            seed=int(seed),
            times=times,
            kinds=np.asarray([int(e.kind) for e in evs], dtype=np.int8),
            sources=np.asarray([e.site for e in evs], dtype=np.int64),
            targets=np.asarray(
                [e.target if e.kind is EventKind.ARROW else -1 for e in evs], dtype=np.int64
            ),
            two_only=np.asarray([bool(e.two_only) for e in evs], dtype=bool),
        )


class EventCursor:
    """
    Iterator over a log window in time order.

    Forward cursors yield events in (start, stop] increasing; reverse cursors
    yield the same window decreasing.
    """

    def __init__(
        self,
        log: EventLog,
        direction: Direction = Direction.FORWARD,
        start: float = 0.0,
        stop: Optional[float] = None,
    ):
        self.log = log
        self.direction = Direction(direction)
        stop = log.horizon if stop is None else stop
        self._lo, self._hi = log.index_range(start, stop)
        if self.direction is Direction.FORWARD:
            self._next = self._lo
            self.position = start
        else:
            self._next = self._hi - 1
            self.position = stop

    def __iter__(self) -> "EventCursor":
        return self

    def __next__(self) -> Event:
        if self.direction is Direction.FORWARD:
            if self._next >= self._hi:
                raise StopIteration
            event = self.log.event(self._next)
            self._next += 1
        else:
            if self._next < self._lo:
                raise StopIteration
            event = self.log.event(self._next)
            self._next -= 1
        self.position = event.time
        return event


def merged_cursor(
    log: EventLog,
    direction: Union[Direction, str] = Direction.FORWARD,
) -> EventCursor:
    """Cursor over every event of the log in the given direction."""
    return EventCursor(log, Direction(direction))


def _check_rates(lambda1: float, lambda2: float, allow_zero: bool) -> None:
    if allow_zero:
        if lambda1 < 0 or lambda2 < 0:
            raise ValueError(f"Rates must be nonnegative, got ({lambda1}, {lambda2})")
    elif lambda1 <= 0 or lambda2 <= 0:
        raise ValueError(f"Rates must be positive, got ({lambda1}, {lambda2})")
    if lambda1 > lambda2:
        raise ValueError(
            f"lambda1={lambda1} > lambda2={lambda2}; order the types so that lambda1 <= lambda2"
        )


def _stream_times(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    n = int(rng.poisson(rate * horizon))
    # 1 - U lies in (0, 1], so times land in (0, horizon]
    return np.sort(horizon * (1.0 - rng.random(n)))


def _break_ties(times: np.ndarray, horizon: float, seed: int) -> np.ndarray:
    """Redraw offsets of events whose timestamp repeats an earlier one."""
    times = times.copy()
    redraws = 0
    while True:
        order = np.argsort(times, kind="stable")
        dup = np.flatnonzero(np.diff(times[order]) == 0) + 1
        if dup.size == 0:
            return times
        for pos in dup:
            rng = stream(seed, StreamFamily.TIE_BREAK, redraws)
            times[order[pos]] = horizon * (1.0 - rng.random())
            redraws += 1
        logger.debug(f"Redrew {dup.size} tied timestamps")


def sample_events(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    horizon: float,
    seed: int,
    allow_zero_rates: bool = False,
) -> EventLog:
    """
    Sample every Poisson stream of the graphical construction on (0, horizon].

    Stream identity is (seed, family, index): deaths use the site id, arrows
    the directed edge id, so regeneration is bit-exact and order-free.

    Args:
        topo: Topology
        lambda1: Type-1 birth rate
        lambda2: Type-2 birth rate (>= lambda1)
        horizon: Window length T
        seed: 64-bit seed
        allow_zero_rates: Accept rate 0 (estimators at lambda = 0)

    Returns:
        EventLog

    Raises:
        ValueError: lambda1 > lambda2, nonpositive rates or horizon
    """
    _check_rates(lambda1, lambda2, allow_zero=allow_zero_rates)
    if horizon <= 0:
        raise ValueError(f"Horizon must be positive, got {horizon}")

    p_two = 1.0 - lambda1 / lambda2 if lambda2 > 0 else 0.0
    t_parts: List[np.ndarray] = []
    k_parts: List[np.ndarray] = []
    s_parts: List[np.ndarray] = []
    d_parts: List[np.ndarray] = []
    o_parts: List[np.ndarray] = []

    for x in range(topo.site_count):
        ts = _stream_times(stream(seed, StreamFamily.DEATHS, x), 1.0, horizon)
        t_parts.append(ts)
        k_parts.append(np.full(ts.size, EventKind.DEATH, dtype=np.int8))
        s_parts.append(np.full(ts.size, x, dtype=np.int64))
        d_parts.append(np.full(ts.size, -1, dtype=np.int64))
        o_parts.append(np.zeros(ts.size, dtype=bool))

    if lambda2 > 0:
        for e, (x, y) in enumerate(topo.edges):
            rng = stream(seed, StreamFamily.ARROWS, e)
            ts = _stream_times(rng, lambda2, horizon)
            t_parts.append(ts)
            k_parts.append(np.full(ts.size, EventKind.ARROW, dtype=np.int8))
            s_parts.append(np.full(ts.size, x, dtype=np.int64))
            d_parts.append(np.full(ts.size, y, dtype=np.int64))
            o_parts.append(rng.random(ts.size) < p_two)

    times = _break_ties(np.concatenate(t_parts), horizon, seed)
    order = np.argsort(times, kind="stable")

    log = EventLog(
        topo=topo,
        horizon=float(horizon),
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        seed=int(seed),
        times=times[order],
        kinds=np.concatenate(k_parts)[order],
        sources=np.concatenate(s_parts)[order],
        targets=np.concatenate(d_parts)[order],
        two_only=np.concatenate(o_parts)[order],
    )
    logger.debug(f"Sampled {len(log)} events on {topo.site_count} sites, T={horizon}")
    return log


def restrict(log: EventLog) -> EventLog:
    """
    The log with 2-only arrows removed.

    This is the graphical construction of the rate-lambda1 single-type process
    that the type-1 coupling uses.
    """
    keep = ~log.two_only
    return EventLog(
        topo=log.topo,
        horizon=log.horizon,
        lambda1=log.lambda1,
        lambda2=log.lambda1,
        seed=log.seed,
        times=log.times[keep],
        kinds=log.kinds[keep],
        sources=log.sources[keep],
        targets=log.targets[keep],
        two_only=np.zeros(int(keep.sum()), dtype=bool),
    )


def dump_log(log: EventLog, path: Union[str, Path]) -> None:
    """
    Write the log as text, one event per line: `time kind site [site2] [two_only]`.

    Times use 17 significant digits so replay is bit-exact.
    """
    topo = describe(log.topo)
    lines = [
        f"# topology {topo['kind']} {topo['d']} {topo['extent']}",
        f"# horizon {log.horizon:.17g}",
        f"# lambda1 {log.lambda1:.17g}",
        f"# lambda2 {log.lambda2:.17g}",
        f"# seed {log.seed}",
    ]
    times, kinds, sources, targets, two_only = log.columns
    for t, k, s, d, o in zip(times, kinds, sources, targets, two_only):
        if k == EventKind.DEATH:
            lines.append(f"{t:.17g} death {s}")
        else:
            lines.append(f"{t:.17g} arrow {s} {d} {int(o)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(log)} events to {path}")


def load_log(path: Union[str, Path], topo: Optional[Topology] = None) -> EventLog:
    """
    Read a log written by dump_log.

    Args:
        path: File path
        topo: Topology to attach (rebuilt from the header for tori and tree balls if None)
    """
    header = {}
    events: List[Event] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts:
                header[parts[0]] = parts[1:]
            continue
        parts = line.split()
        try:
            if parts[1] == "death":
                events.append(Event(float(parts[0]), EventKind.DEATH, int(parts[2])))
            elif parts[1] == "arrow":
                events.append(
                    Event(
                        float(parts[0]),
                        EventKind.ARROW,
                        int(parts[2]),
                        int(parts[3]),
                        bool(int(parts[4])),
                    )
                )
            else:
                raise ValueError(f"unknown kind {parts[1]!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"{path}:{lineno}: malformed event line: {e}") from e

    if topo is None:
        kind, d, extent = header["topology"]
        if TopologyKind(kind) is TopologyKind.GRAPH:
            raise ValueError("Plain-graph logs need the topology passed explicitly")
        topo = from_description({"kind": kind, "d": int(d), "extent": int(extent)})

    return EventLog.from_events(
        topo,
        events,
        horizon=float(header["horizon"][0]),
        lambda1=float(header["lambda1"][0]),
        lambda2=float(header["lambda2"][0]),
        seed=int(header["seed"][0]),
    )


def pooled_gaps(logs: Sequence[EventLog], kind: EventKind) -> np.ndarray:
    """
    Inter-arrival gaps pooled over every stream of the given kind.

    Each stream contributes its first arrival time (the gap from 0) and the
    gaps between consecutive arrivals. The censored interval from the last
    arrival to the horizon is excluded, so a stream with no events adds
    nothing.
    """
    gaps: List[np.ndarray] = []
    for log in logs:
        if kind is EventKind.DEATH:
            for x in range(log.topo.site_count):
                gaps.append(np.diff(np.concatenate(([0.0], log.deaths(x)))))
        else:
            for x, y in log.topo.edges:
                ts, _ = log.arrows(int(x), int(y))
                gaps.append(np.diff(np.concatenate(([0.0], ts))))
    return np.concatenate(gaps) if gaps else np.zeros(0)
