"""Initial configurations that are constant on tree sectors."""

from typing import Sequence, Tuple

import numpy as np

from ..forward import Configuration
from ..topology import Topology, depth, sector


def make_sector_configuration(
    topo: Topology,
    assignments: Sequence[Tuple[int, int]],
    default: int = 0,
) -> Configuration:
    """
    Configuration equal to state i on each listed sector S(y), default elsewhere.

    Args:
        topo: Tree-ball topology
        assignments: (boundary site y, state i) pairs, all y at the same depth
        default: State outside the listed sectors

    Raises:
        ValueError: Non-tree topology, sites at different depths or at the
            root, repeated sites (overlapping sectors), states outside {0,1,2}
    """
    if default not in (0, 1, 2):
        raise ValueError(f"Default state must be 0, 1 or 2, got {default}")
    states = np.full(topo.site_count, default, dtype=np.int8)
    if not assignments:
        return Configuration(states)

    levels = {depth(topo, y) for y, _ in assignments}
    if len(levels) != 1:
        raise ValueError(f"Sector roots must share one boundary, got depths {sorted(levels)}")
    if levels == {0}:
        raise ValueError("The root is not a boundary site")

    seen = set()
    for y, state in assignments:
        if state not in (0, 1, 2):
            raise ValueError(f"Sector state must be 0, 1 or 2, got {state}")
        if y in seen:
            raise ValueError(f"Overlapping sectors at site {y}")
        seen.add(y)
        states[list(sector(topo, y))] = state
    return Configuration(states)
