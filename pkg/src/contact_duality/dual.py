"""
Reverse-time duals over an event log.

- reachable_set: the sets D_s^{i,(x,t)} by an independent reverse sweep
- run_ancestors: the ordered ancestor list with 1-blocking marks
- psi: the duality function evaluated against a configuration
- duality_check: xi_t(x) == psi(x, ancestors at s, xi_{t-s}) at every dual jump

Ancestor lists are kept as trees flattened in priority order. Each entry
records its depth below the base point and the label of the arrow linking it
to its parent. A death turns the entries at that site into spent entries:
they leave the support but keep the entries below them, which still say how
the site was refilled after the death. Spent entries with nothing live below
them are dropped.
"""

import bisect
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .forward import Configuration, trajectory
from .graphical import EventKind, EventLog
from .topology import Topology

logger = logging.getLogger(__name__)

DEATH = int(EventKind.DEATH)


class AncestorOverflowError(RuntimeError):
    """The ancestor list outgrew the configured entry limit."""


@dataclass(frozen=True)
class AncestorEntry:
    """One ancestor (a_j, b_j) plus its place in the ancestry tree."""
    site: int
    mark: int  # 1, or 2 when 1-blocked
    depth: int = 0  # arrows between this entry and the base point
    two_only: bool = False  # label of the arrow to the parent entry
    alive: bool = True  # False once a death at the site has been passed


@dataclass(frozen=True)
class AncestorList:
    """Ancestors in decreasing priority; entries[0] is the primary ancestor."""
    entries: Tuple[AncestorEntry, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "AncestorList":
        """
        Flat list from (site, mark) pairs.

        Every entry sits directly under the base point with a link labeled by
        its mark, so psi reduces to the plain left-to-right scan.
        """
        entries = []
        for site, mark in pairs:
            if mark not in (1, 2):
                raise ValueError(f"Ancestor mark must be 1 or 2, got {mark}")
            entries.append(AncestorEntry(int(site), int(mark), 0, mark == 2))
        return cls(tuple(entries))

    @classmethod
    def parse(cls, text: str) -> "AncestorList":
        """Inverse of format() for integer sites."""
        text = text.strip()
        if not text:
            return cls()
        pairs = []
        for item in text.split(";"):
            site, mark = item.strip().strip("()").split(",")
            pairs.append((int(site), int(mark)))
        return cls.from_pairs(pairs)

    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        """The ((a_1, b_1), ..., (a_n, b_n)) sequence."""
        return tuple((e.site, e.mark) for e in self.entries if e.alive)

    def support(self) -> frozenset:
        return frozenset(e.site for e in self.entries if e.alive)

    def sites_with_mark(self, mark: int) -> frozenset:
        return frozenset(e.site for e in self.entries if e.alive and e.mark == mark)

    def is_empty(self) -> bool:
        return not any(e.alive for e in self.entries)

    def __len__(self) -> int:
        return sum(1 for e in self.entries if e.alive)

    def format(self, labels: Optional[Sequence[str]] = None) -> str:
        """Render as "(site,mark);(site,mark);..." (site labels if given)."""
        def name(site: int) -> str:
            return labels[site] if labels is not None else str(site)
        return ";".join(f"({name(s)},{m})" for s, m in self.pairs())


@dataclass
class DualTrajectory:
    """Ancestor lists of xi-hat^{(x,t)} after each jump; states[0] is ((x,1)) at s = 0."""
    base_site: int
    base_time: float
    jump_times: List[float]  # dual times s = t - u, nondecreasing
    forward_times: List[float]  # forward times u of the same jumps, decreasing
    states: List[AncestorList]
    log_identity: str
    compact: bool = False

    @property
    def supports(self) -> List[frozenset]:
        return [st.support() for st in self.states]

    def state_at(self, s: float) -> AncestorList:
        """Ancestor list at dual time s (right-continuous)."""
        if not 0.0 <= s <= self.base_time:
            raise ValueError(f"Dual time {s} outside [0, {self.base_time}]")
        return self.states[bisect.bisect_right(self.jump_times, s)]


@dataclass
class SupportTrajectory:
    """Support-only dual: D_s^{(x,t)} after each jump."""
    base_site: int
    base_time: float
    jump_times: List[float]
    supports: List[frozenset] = field(default_factory=list)

    def __iter__(self) -> Iterator[Tuple[float, frozenset]]:
        return iter(zip([0.0] + self.jump_times, self.supports))

    def support_at(self, s: float) -> frozenset:
        """Support at dual time s (right-continuous)."""
        if not 0.0 <= s <= self.base_time:
            raise ValueError(f"Dual time {s} outside [0, {self.base_time}]")
        return self.supports[bisect.bisect_right(self.jump_times, s)]


@dataclass
class DualityReport:
    """Both sides of the duality equation at every evaluated dual time."""
    site: int
    time: float
    value: int  # xi_t(x)
    rows: List[Tuple[float, int]]  # (s, psi at s)
    passed: bool
    dual: Optional[DualTrajectory] = field(default=None, repr=False)


def _insert(
    entries: List[AncestorEntry],
    a: int,
    b: int,
    two_only: bool,
    compact: bool,
) -> Tuple[List[AncestorEntry], int]:
    """Arrow a -> b: insert (a, mark) right after every live entry at b."""
    out: List[AncestorEntry] = []
    chain: List[AncestorEntry] = []  # current entry and its ancestors
    inserted = 0
    for e in entries:
        if compact:
            while chain and chain[-1].depth >= e.depth:
                chain.pop()
            chain.append(e)
        out.append(e)
        if not e.alive or e.site != b:
            continue
        # a live entry at a higher on the path already answers for site a
        if compact and any(c.alive and c.site == a for c in chain):
            continue
        mark = 2 if (two_only or e.mark == 2) else 1
        out.append(AncestorEntry(a, mark, e.depth + 1, two_only))
        inserted += 1
    return out, inserted


def _kill(entries: List[AncestorEntry], y: int) -> List[AncestorEntry]:
    """Death at y: spend every live entry at y, then drop dead subtrees."""
    marked = [replace(e, alive=False) if e.alive and e.site == y else e for e in entries]
    keep = [False] * len(marked)
    live_below: Dict[int, bool] = {}
    for i in range(len(marked) - 1, -1, -1):
        e = marked[i]
        below = live_below.get(e.depth + 1, False)
        live_below[e.depth + 1] = False
        has_live = e.alive or below
        keep[i] = has_live
        if has_live:
            live_below[e.depth] = True
    return [e for e, k in zip(marked, keep) if k]


def run_ancestors(
    topo: Topology,
    log: EventLog,
    x: int,
    t: float,
    compact: bool = False,
    max_entries: Optional[int] = None,
) -> DualTrajectory:
    """
    Run the ancestor process from (x, t) down to forward time 0.

    Starts at ((x, 1)). An arrow a -> a_j inserts (a, b) after every entry at
    a_j, with b = 2 if the arrow is 2-only or the entry is 1-blocked; a death
    at a_j removes every entry at a_j from the list.

    Args:
        topo: Topology
        log: Event log
        x: Base site
        t: Base time (<= horizon)
        compact: Skip insertions of a site already held live on the path to
            the base point (same support, mark-1 set and psi; smaller lists)
        max_entries: Raise AncestorOverflowError beyond this many entries

    Returns:
        DualTrajectory with every jump

    Raises:
        ValueError: t beyond horizon
        AncestorOverflowError: List outgrew max_entries
    """
    if t > log.horizon:
        raise ValueError(f"t={t} beyond log horizon {log.horizon}")
    x = topo.check_site(x)

    entries = [AncestorEntry(x, 1)]
    live = Counter({x: 1})
    states = [AncestorList(tuple(entries))]
    jump_times: List[float] = []
    forward_times: List[float] = []

    times, kinds, sources, targets, two_only = log.columns
    _, hi = log.index_range(0.0, t)
    for i in range(hi - 1, -1, -1):
        if not entries:
            break
        src = sources[i]
        if kinds[i] == DEATH:
            if not live[src]:
                continue
            entries = _kill(entries, src)
            live[src] = 0
        else:
            dst = targets[i]
            if not live[dst]:
                continue
            entries, inserted = _insert(entries, src, dst, two_only[i], compact)
            if not inserted:
                continue
            live[src] += inserted
            if max_entries is not None and len(entries) > max_entries:
                raise AncestorOverflowError(
                    f"Ancestor list from site {x} reached {len(entries)} entries "
                    f"(limit {max_entries}) at forward time {times[i]:.6g}"
                )
        forward_times.append(times[i])
        jump_times.append(t - times[i])
        states.append(AncestorList(tuple(entries)))

    return DualTrajectory(
        base_site=x,
        base_time=t,
        jump_times=jump_times,
        forward_times=forward_times,
        states=states,
        log_identity=log.identity,
        compact=compact,
    )


def support_trajectory(topo: Topology, log: EventLog, x: int, t: float) -> SupportTrajectory:
    """Support of the ancestor process only (the dual D_s^{(x,t)}), cheap at any size."""
    if t > log.horizon:
        raise ValueError(f"t={t} beyond log horizon {log.horizon}")
    x = topo.check_site(x)

    current = {x}
    supports = [frozenset(current)]
    jump_times: List[float] = []
    times, kinds, sources, targets, _ = log.columns
    _, hi = log.index_range(0.0, t)
    for i in range(hi - 1, -1, -1):
        if not current:
            break
        src = sources[i]
        if kinds[i] == DEATH:
            if src not in current:
                continue
            current.discard(src)
        else:
            if targets[i] not in current or src in current:
                continue
            current.add(src)
        jump_times.append(t - times[i])
        supports.append(frozenset(current))
    return SupportTrajectory(x, t, jump_times, supports)


def _reach_step(
    reach1: List[bool],
    reach2: List[bool],
    kind: int,
    src: int,
    dst: int,
    two_only: bool,
) -> bool:
    """Apply one event of the reverse sweep; True if a flag changed."""
    if kind == DEATH:
        changed = reach1[src] or reach2[src]
        reach1[src] = reach2[src] = False
        return changed
    changed = False
    if reach1[dst]:
        if two_only:
            changed |= not reach2[src]
            reach2[src] = True
        else:
            changed |= not reach1[src]
            reach1[src] = True
    if reach2[dst]:
        changed |= not reach2[src]
        reach2[src] = True
    return changed


def _check_window(log: EventLog, t: float, s: float) -> None:
    if s > t or s < 0:
        raise ValueError(f"Dual time s={s} outside [0, t={t}]")
    if t > log.horizon:
        raise ValueError(f"t={t} beyond log horizon {log.horizon}")


def reachable_set(
    topo: Topology,
    log: EventLog,
    x: int,
    t: float,
    s: float,
    kind: Union[int, str] = "both",
) -> frozenset:
    """
    Sites y with a kind-path down from (x, t) to (y, t - s).

    Computed by a reverse sweep carrying two flags per site: reachable by a
    path with no 2-only arrow, and reachable by a path with at least one.
    Events at exactly t - s count, matching the right-continuous dual.

    Args:
        kind: 1, 2 or "both"

    Raises:
        ValueError: s > t, t beyond horizon, or unknown kind
    """
    if kind not in (1, 2, "both"):
        raise ValueError(f"kind must be 1, 2 or 'both', got {kind!r}")
    _check_window(log, t, s)
    x = topo.check_site(x)

    reach1 = [False] * topo.site_count
    reach2 = [False] * topo.site_count
    reach1[x] = True

    _, kinds, sources, targets, two_only = log.columns
    lo = int(np.searchsorted(log.times, t - s, side="left"))
    _, hi = log.index_range(0.0, t)
    for i in range(hi - 1, lo - 1, -1):
        _reach_step(reach1, reach2, kinds[i], sources[i], targets[i], two_only[i])

    if kind == 1:
        flags = reach1
    elif kind == 2:
        flags = reach2
    else:
        flags = [a or b for a, b in zip(reach1, reach2)]
    return frozenset(y for y, f in enumerate(flags) if f)


def reachable_sweep(
    topo: Topology,
    log: EventLog,
    x: int,
    t: float,
) -> List[Tuple[float, frozenset, frozenset]]:
    """
    (u, D^1, D^2) at every forward time u in (0, t] where the sets change.

    The first row is (t, {x}, {}) for s = 0; each later row holds after the
    event at u has been applied, that is at dual time t - u.
    """
    _check_window(log, t, 0.0)
    x = topo.check_site(x)
    reach1 = [False] * topo.site_count
    reach2 = [False] * topo.site_count
    reach1[x] = True

    def snapshot(u: float) -> Tuple[float, frozenset, frozenset]:
        return (
            u,
            frozenset(y for y, f in enumerate(reach1) if f),
            frozenset(y for y, f in enumerate(reach2) if f),
        )

    rows = [snapshot(float(t))]
    times, kinds, sources, targets, two_only = log.columns
    _, hi = log.index_range(0.0, t)
    for i in range(hi - 1, -1, -1):
        if _reach_step(reach1, reach2, kinds[i], sources[i], targets[i], two_only[i]):
            rows.append(snapshot(times[i]))
            if not any(reach1) and not any(reach2):
                break
    return rows


def psi(x: int, ahat: AncestorList, xi: Configuration) -> int:
    """
    Duality function: the state at the base point implied by ahat and xi.

    An entry's state is xi(site) when the entry is live and the site is
    occupied; otherwise it is what its first child delivers. A child
    delivers a 2 always and a 1 only across an unlabeled link. For a flat
    list this is the scan that returns the first 2, or the first 1 with
    mark 1, and 0 when the list is exhausted.
    """
    if not ahat.entries:
        return 0
    states = xi.states
    first: Dict[int, int] = {}  # depth -> delivery of the earliest child seen so far
    for e in reversed(ahat.entries):
        from_children = first.get(e.depth + 1, 0)
        first[e.depth + 1] = 0
        own = int(states[e.site]) if e.alive else 0
        state = own if own else from_children
        delivered = state if (state == 2 or (state == 1 and not e.two_only)) else 0
        if delivered:
            first[e.depth] = delivered
    return first.get(0, 0)


def blocked_prefix(ahat: AncestorList) -> frozenset:
    """
    Sites of the maximal all-1-blocked prefix (A_t^x).

    Empty if the list is empty or the primary ancestor is not blocked.
    """
    out = set()
    for site, mark in ahat.pairs():
        if mark != 2:
            break
        out.add(site)
    return frozenset(out)


def duality_report(
    topo: Topology,
    log: EventLog,
    xi0: Configuration,
    x: int,
    t: float,
    compact: bool = True,
    max_entries: Optional[int] = None,
) -> DualityReport:
    """
    Evaluate both sides of xi_t(x) = psi(x, ahat_s, xi_{t-s}) on one log.

    s ranges over 0, every dual jump and t. At a jump at forward time u the
    list already accounts for the event at u, so it is paired with the
    configuration just before u.
    """
    dual = run_ancestors(topo, log, x, t, compact=compact, max_entries=max_entries)

    # configurations at u^- for every jump u, plus time 0 and time t
    before = [float(np.nextafter(u, -np.inf)) for u in dual.forward_times]
    sample = sorted(set(before) | {0.0, float(t)})
    traj = trajectory(topo, log, xi0, sample)
    at = dict(zip(traj.times, traj.configurations))

    value = at[float(t)][x]
    rows = [(0.0, psi(x, dual.states[0], at[float(t)]))]
    for j, u_minus in enumerate(before):
        rows.append((dual.jump_times[j], psi(x, dual.states[j + 1], at[u_minus])))
    rows.append((float(t), psi(x, dual.states[-1], at[0.0])))

    passed = all(v == value for _, v in rows)
    if not passed:
        logger.error(
            f"Duality mismatch at site {x}, t={t}, log {log.identity}: "
            f"xi_t(x)={value}, psi values {sorted({v for _, v in rows})}"
        )
    return DualityReport(site=x, time=t, value=value, rows=rows, passed=passed, dual=dual)


def duality_check(
    topo: Topology,
    log: EventLog,
    xi0: Configuration,
    x: int,
    t: float,
    compact: bool = True,
    max_entries: Optional[int] = None,
) -> bool:
    """True iff the duality equation holds at every evaluated dual time."""
    return duality_report(topo, log, xi0, x, t, compact, max_entries).passed


def check_identities(
    topo: Topology,
    log: EventLog,
    dual: DualTrajectory,
) -> Tuple[bool, bool, bool]:
    """
    Compare a dual against the independent reachability sweep.

    Checked wherever either side changes: support == D, mark-1 sites == D^1,
    mark-2 sites == D^2. Compact lists may drop mark-2 duplicates, so the
    third flag is only meaningful for full lists.

    Returns:
        (support_ok, mark1_ok, mark2_ok)
    """
    t = dual.base_time
    sweep = reachable_sweep(topo, log, dual.base_site, t)
    neg_u = [-u for u, _, _ in sweep]

    pairs = [(sweep[0], dual.states[0])]
    pairs += [(row, dual.state_at(t - row[0])) for row in sweep[1:]]
    for u, state in zip(dual.forward_times, dual.states[1:]):
        pairs.append((sweep[bisect.bisect_right(neg_u, -u) - 1], state))

    support_ok = mark1_ok = mark2_ok = True
    for (_, r1, r2), state in pairs:
        support_ok &= state.support() == (r1 | r2)
        mark1_ok &= state.sites_with_mark(1) == r1
        mark2_ok &= state.sites_with_mark(2) == r2
    return support_ok, mark1_ok, mark2_ok


def hit_times(
    dual: Union[DualTrajectory, SupportTrajectory],
    target: Iterable[int],
) -> Tuple[Optional[float], Optional[float]]:
    """
    First and last dual times at which the support meets target.

    The support after jump k holds on [s_k, s_{k+1}); the last interval ends
    at the base time. (None, None) if the support never meets target.
    """
    target = frozenset(target)
    supports = dual.supports
    starts = [0.0] + list(dual.jump_times)
    ends = list(dual.jump_times) + [dual.base_time]

    first: Optional[float] = None
    last: Optional[float] = None
    for support, start, end in zip(supports, starts, ends):
        if support & target:
            if first is None:
                first = start
            last = end
    return first, last
