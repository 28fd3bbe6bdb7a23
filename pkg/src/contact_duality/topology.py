"""
Finite graphs the processes run on.

- Tori of Z^d (periodic, row-major site ids)
- Balls B_K of the regular tree T_d (BFS site ids, root 0, absorbing truncation)
- Small arbitrary graphs for the exact oracle (single site, paths, stars)

Topologies are immutable and safe to share across replicas and processes.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

logger = logging.getLogger(__name__)


class TopologyKind(str, Enum):
    """Kind of finite graph."""
    TORUS = "torus"
    TREE_BALL = "tree-ball"
    GRAPH = "graph"


@dataclass(frozen=True)
class Topology:
    """A finite simple graph with the extra structure of its kind."""
    kind: TopologyKind
    d: int  # lattice dimension, or tree parameter (d+1 neighbors per vertex)
    extent: int  # torus side L, tree radius K, or site count for plain graphs
    adjacency: Tuple[Tuple[int, ...], ...]
    site_labels: Tuple[str, ...]
    root: Optional[int] = None  # tree-ball only
    parent: Optional[Tuple[int, ...]] = field(default=None, repr=False)  # -1 at the root
    depths: Optional[Tuple[int, ...]] = field(default=None, repr=False)

    @property
    def site_count(self) -> int:
        return len(self.adjacency)

    @cached_property
    def edges(self) -> np.ndarray:
        """Directed edges (x, y), one per ordered neighbor pair; row index = edge id."""
        pairs = [(x, y) for x, nbrs in enumerate(self.adjacency) for y in nbrs]
        return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def edge_index(self) -> Dict[Tuple[int, int], int]:
        return {(int(x), int(y)): i for i, (x, y) in enumerate(self.edges)}

    @cached_property
    def sparse_adjacency(self) -> csr_matrix:
        n = self.site_count
        e = self.edges
        data = np.ones(len(e), dtype=np.int8)
        return csr_matrix((data, (e[:, 0], e[:, 1])), shape=(n, n))

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        if self.parent is None:
            raise ValueError("children are only defined for tree-ball topologies")
        kids: List[List[int]] = [[] for _ in range(self.site_count)]
        for site, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(site)
        return tuple(tuple(k) for k in kids)

    def check_site(self, x: int) -> int:
        """Return x as int, or raise if it is not a site."""
        if not 0 <= int(x) < self.site_count:
            raise ValueError(f"Invalid site {x}; topology has {self.site_count} sites")
        return int(x)

    def neighbors(self, x: int) -> Tuple[int, ...]:
        return self.adjacency[self.check_site(x)]

    def label(self, x: int) -> str:
        return self.site_labels[self.check_site(x)]


def _check_adjacency(adjacency: Sequence[Sequence[int]]) -> None:
    n = len(adjacency)
    for x, nbrs in enumerate(adjacency):
        if len(set(nbrs)) != len(nbrs):
            raise ValueError(f"Duplicate neighbors at site {x}")
        for y in nbrs:
            if not 0 <= y < n:
                raise ValueError(f"Neighbor {y} of site {x} is not a site")
            if y == x:
                raise ValueError(f"Self-loop at site {x}")
            if x not in adjacency[y]:
                raise ValueError(f"Adjacency not symmetric: {x}->{y} without {y}->{x}")


def make_torus(d: int, L: int) -> Topology:
    """
    Periodic d-dimensional lattice of side L.

    Args:
        d: Dimension (>= 1)
        L: Side length (>= 3, so the two neighbors along an axis differ)

    Returns:
        Torus topology with row-major site ids
    """
    if d < 1:
        raise ValueError(f"Torus dimension must be >= 1, got {d}")
    if L < 3:
        raise ValueError(f"Torus side must be >= 3, got {L}")

    shape = (L,) * d
    n = L ** d
    adjacency: List[Tuple[int, ...]] = []
    labels: List[str] = []
    for site in range(n):
        coords = np.unravel_index(site, shape)
        nbrs = []
        for axis in range(d):
            for step in (-1, 1):
                c = list(coords)
                c[axis] = (c[axis] + step) % L
                nbrs.append(int(np.ravel_multi_index(tuple(c), shape)))
        adjacency.append(tuple(nbrs))
        labels.append("(" + ",".join(str(int(c)) for c in coords) + ")")

    logger.debug(f"Built torus d={d} L={L} with {n} sites")
    return Topology(
        kind=TopologyKind.TORUS,
        d=d,
        extent=L,
        adjacency=tuple(adjacency),
        site_labels=tuple(labels),
    )


def make_tree_ball(d: int, K: int) -> Topology:
    """
    Ball of radius K around the root of the tree in which every vertex has d+1 neighbors.

    Sites are numbered in BFS order with the root at 0. Edges leaving the ball
    do not exist, so leaves at depth K have a single neighbor.
    """
    if d < 2:
        raise ValueError(f"Tree parameter must be >= 2, got {d}")
    if K < 1:
        raise ValueError(f"Tree radius must be >= 1, got {K}")

    parent = [-1]
    depths = [0]
    labels = ["O"]
    frontier = [0]
    for depth in range(1, K + 1):
        nxt = []
        for p in frontier:
            n_children = d + 1 if p == 0 else d
            for i in range(n_children):
                site = len(parent)
                parent.append(p)
                depths.append(depth)
                labels.append(str(i) if p == 0 else f"{labels[p]}.{i}")
                nxt.append(site)
        frontier = nxt

    adjacency: List[List[int]] = [[] for _ in parent]
    for site, p in enumerate(parent):
        if p >= 0:
            adjacency[p].append(site)
            adjacency[site].append(p)

    logger.debug(f"Built tree ball d={d} K={K} with {len(parent)} sites")
    return Topology(
        kind=TopologyKind.TREE_BALL,
        d=d,
        extent=K,
        adjacency=tuple(tuple(sorted(a)) for a in adjacency),
        site_labels=tuple(labels),
        root=0,
        parent=tuple(parent),
        depths=tuple(depths),
    )


def make_graph(
    adjacency: Sequence[Sequence[int]],
    labels: Optional[Sequence[str]] = None,
) -> Topology:
    """Arbitrary small simple graph (oracle work: single site, paths, stars)."""
    if len(adjacency) == 0:
        raise ValueError("Graph must have at least one site")
    _check_adjacency(adjacency)
    if labels is None:
        labels = [str(i) for i in range(len(adjacency))]
    if len(labels) != len(adjacency):
        raise ValueError("One label per site required")
    return Topology(
        kind=TopologyKind.GRAPH,
        d=max((len(a) for a in adjacency), default=0),
        extent=len(adjacency),
        adjacency=tuple(tuple(int(y) for y in a) for a in adjacency),
        site_labels=tuple(labels),
    )


def make_path(n: int, labels: Optional[Sequence[str]] = None) -> Topology:
    """Path 0 - 1 - ... - (n-1)."""
    if n < 1:
        raise ValueError(f"Path needs at least one site, got {n}")
    adjacency = [[y for y in (x - 1, x + 1) if 0 <= y < n] for x in range(n)]
    return make_graph(adjacency, labels)


def make_star(n: int) -> Topology:
    """Star on n sites: center 0 joined to leaves 1..n-1."""
    if n < 1:
        raise ValueError(f"Star needs at least one site, got {n}")
    adjacency = [list(range(1, n))] + [[0] for _ in range(1, n)]
    return make_graph(adjacency)


def bfs_distances(topo: Topology, sources: Iterable[int]) -> np.ndarray:
    """
    Graph distance from every site to the nearest source.

    Returns:
        int array of length N; -1 where unreachable
    """
    idx = sorted({topo.check_site(s) for s in sources})
    if not idx:
        raise ValueError("At least one source site required")
    dist = shortest_path(topo.sparse_adjacency, unweighted=True, directed=False, indices=idx)
    nearest = np.min(np.atleast_2d(dist), axis=0)
    out = np.where(np.isfinite(nearest), nearest, -1)
    return out.astype(np.int64)


def distance(topo: Topology, x: int, y: int) -> int:
    """Graph distance |x - y|."""
    x, y = topo.check_site(x), topo.check_site(y)
    if x == y:
        return 0

    if topo.kind is TopologyKind.TORUS:
        shape = (topo.extent,) * topo.d
        cx = np.unravel_index(x, shape)
        cy = np.unravel_index(y, shape)
        L = topo.extent
        return int(sum(min(abs(a - b), L - abs(a - b)) for a, b in zip(cx, cy)))

    if topo.kind is TopologyKind.TREE_BALL:
        # climb to the meeting point m: |x-y| = |x-m| + |m-y|
        assert topo.parent is not None and topo.depths is not None
        steps = 0
        while x != y:
            if topo.depths[x] >= topo.depths[y]:
                x = topo.parent[x]
            else:
                y = topo.parent[y]
            steps += 1
        return steps

    return int(bfs_distances(topo, [x])[y])


def depth(topo: Topology, x: int) -> int:
    """Distance from the root of a tree ball."""
    _require_tree(topo)
    assert topo.depths is not None
    return topo.depths[topo.check_site(x)]


def diameter(topo: Topology) -> int:
    """Largest distance between two sites (-1 never occurs on connected graphs)."""
    if topo.kind is TopologyKind.TORUS:
        return topo.d * (topo.extent // 2)
    if topo.kind is TopologyKind.TREE_BALL:
        return 2 * topo.extent
    dist = shortest_path(topo.sparse_adjacency, unweighted=True, directed=False)
    finite = dist[np.isfinite(dist)]
    return int(finite.max()) if finite.size else 0


def _require_tree(topo: Topology) -> None:
    if topo.kind is not TopologyKind.TREE_BALL:
        raise ValueError(f"Operation requires a tree-ball topology, got {topo.kind.value}")


def sector(topo: Topology, x: int) -> FrozenSet[int]:
    """
    Sector S(x): the subtree at x pointing away from the root.

    Raises:
        ValueError: On non-tree topologies or x = root
    """
    _require_tree(topo)
    x = topo.check_site(x)
    if x == topo.root:
        raise ValueError("Sector of the root is not defined")

    out = []
    stack = [x]
    while stack:
        site = stack.pop()
        out.append(site)
        stack.extend(topo.children[site])
    return frozenset(out)


def ball(topo: Topology, K0: int) -> FrozenSet[int]:
    """Sites at distance <= K0 from the root."""
    _check_radius(topo, K0)
    assert topo.depths is not None
    return frozenset(s for s, k in enumerate(topo.depths) if k <= K0)


def boundary(topo: Topology, K0: int) -> FrozenSet[int]:
    """Outer boundary of B_K0: sites at distance exactly K0 + 1 from the root."""
    _check_radius(topo, K0)
    assert topo.depths is not None
    return frozenset(s for s, k in enumerate(topo.depths) if k == K0 + 1)


def _check_radius(topo: Topology, K0: int) -> None:
    _require_tree(topo)
    if K0 < 0:
        raise ValueError(f"Radius must be >= 0, got {K0}")
    if K0 >= topo.extent:
        raise ValueError(
            f"Radius {K0} leaves an empty boundary in a ball of radius {topo.extent}"
        )


def describe(topo: Topology) -> Dict[str, Any]:
    """Structured description stored in run manifests."""
    desc: Dict[str, Any] = {"kind": topo.kind.value, "d": topo.d, "extent": topo.extent}
    if topo.kind is TopologyKind.GRAPH:
        desc["adjacency"] = [list(a) for a in topo.adjacency]
    return desc


def from_description(desc: Dict[str, Any]) -> Topology:
    """Inverse of describe()."""
    kind = TopologyKind(desc["kind"])
    if kind is TopologyKind.TORUS:
        return make_torus(int(desc["d"]), int(desc["extent"]))
    if kind is TopologyKind.TREE_BALL:
        return make_tree_ball(int(desc["d"]), int(desc["extent"]))
    if "adjacency" in desc:
        return make_graph(desc["adjacency"])
    return make_path(int(desc["extent"]))
