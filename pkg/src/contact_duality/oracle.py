"""
Exact transient laws of the two-type process on tiny graphs.

The process on N sites is a continuous-time Markov chain on 3^N
configurations. The generator is assembled as a sparse matrix and applied by
uniformization, which gives the exact law of xi_t up to a Poisson tail of
configurable mass.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from .core.config import get_config
from .forward import Configuration
from .topology import Topology

logger = logging.getLogger(__name__)


class OracleSizeError(ValueError):
    """State space larger than the oracle accepts."""


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Sparse generator Q of the chain; rows index the source configuration."""
    topo: Topology
    lambda1: float
    lambda2: float
    matrix: sparse.csr_matrix  # includes the diagonal
    outflow: np.ndarray  # total exit rate per configuration

    @property
    def state_count(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def site_count(self) -> int:
        return self.topo.site_count

    @property
    def uniformization_rate(self) -> float:
        return float(self.outflow.max()) if self.outflow.size else 0.0


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Law of xi_t over all 3^N configurations, indexed by encode_configuration."""
    time: float
    probabilities: np.ndarray
    site_count: int
    lambda1: float
    lambda2: float

    def probability(self, xi: Configuration) -> float:
        return float(self.probabilities[encode_configuration(xi)])

    def total_mass(self) -> float:
        return float(self.probabilities.sum())


@dataclass(frozen=True, eq=False)
class MarginalTable:
    """Joint law of the states at a few sites; table axes follow `sites`."""
    sites: Tuple[int, ...]
    table: np.ndarray
    time: float

    def probability(self, pattern: Union[str, Sequence[int]]) -> float:
        """P(xi_t(sites[k]) = pattern[k] for all k)."""
        states = [int(ch) for ch in pattern]
        if len(states) != len(self.sites):
            raise ValueError(f"Pattern {pattern!r} does not match {len(self.sites)} sites")
        return float(self.table[tuple(states)])

    def to_rows(self) -> List[Tuple[str, str, float]]:
        """(sites, pattern, probability) rows in lexicographic pattern order."""
        label = " ".join(str(s) for s in self.sites)
        rows = []
        for pattern in np.ndindex(*self.table.shape):
            rows.append((label, "".join(str(v) for v in pattern), float(self.table[pattern])))
        return rows


def encode_configuration(xi: Configuration) -> int:
    """Base-3 index of a configuration, site 0 least significant."""
    powers = 3 ** np.arange(len(xi), dtype=np.int64)
    return int(np.dot(xi.states.astype(np.int64), powers))


def decode_state(index: int, n: int) -> Configuration:
    """Inverse of encode_configuration for an n-site configuration."""
    if not 0 <= index < 3 ** n:
        raise ValueError(f"State index {index} outside [0, 3^{n})")
    return Configuration((index // 3 ** np.arange(n, dtype=np.int64)) % 3)


def _digits(n: int) -> np.ndarray:
    """State-by-site matrix of site states for every index."""
    idx = np.arange(3 ** n, dtype=np.int64)
    return ((idx[:, None] // (3 ** np.arange(n, dtype=np.int64))[None, :]) % 3).astype(np.int8)


def _check_size(topo: Topology, max_sites: Optional[int]) -> None:
    limit = get_config().ORACLE_MAX_SITES if max_sites is None else max_sites
    if topo.site_count > limit:
        raise OracleSizeError(
            f"Oracle limited to {limit} sites (3^{limit} states), topology has {topo.site_count}"
        )


def build_generator(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    max_sites: Optional[int] = None,
) -> GeneratorMatrix:
    """
    Assemble the generator of the two-type process.

    Occupied sites empty at rate 1; a vacant site becomes type i at rate
    lambda_i times its number of type-i neighbors. lambda1 > lambda2 is
    accepted so that type-swapped chains can be built.

    Args:
        topo: Topology (at most ORACLE_MAX_SITES sites)
        lambda1: Type-1 birth rate
        lambda2: Type-2 birth rate
        max_sites: Override of the configured size limit

    Returns:
        GeneratorMatrix

    Raises:
        OracleSizeError: Too many sites
        ValueError: Negative rates
    """
    _check_size(topo, max_sites)
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError(f"Rates must be nonnegative, got ({lambda1}, {lambda2})")

    n = topo.site_count
    m = 3 ** n
    digits = _digits(n)
    idx = np.arange(m, dtype=np.int64)

    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    rates: List[np.ndarray] = []
    for x in range(n):
        weight = 3 ** x
        state = digits[:, x]

        occupied = state != 0
        rows.append(idx[occupied])
        cols.append(idx[occupied] - state[occupied].astype(np.int64) * weight)
        rates.append(np.ones(int(occupied.sum())))

        vacant = state == 0
        nbrs = list(topo.adjacency[x])
        for kind, lam in ((1, lambda1), (2, lambda2)):
            if lam == 0 or not nbrs:
                continue
            count = (digits[:, nbrs] == kind).sum(axis=1)
            mask = vacant & (count > 0)
            rows.append(idx[mask])
            cols.append(idx[mask] + kind * weight)
            rates.append(lam * count[mask].astype(np.float64))

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    q = np.concatenate(rates)
    off = sparse.coo_matrix((q, (r, c)), shape=(m, m)).tocsr()
    outflow = np.asarray(off.sum(axis=1)).ravel()
    matrix = (off - sparse.diags(outflow)).tocsr()

    logger.debug(f"Built generator on {n} sites: {m} states, {off.nnz} transitions")
    return GeneratorMatrix(
        topo=topo,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        matrix=matrix,
        outflow=outflow,
    )


def transient_distribution(
    gen: GeneratorMatrix,
    start: Union[Configuration, ExactDistribution],
    t: float,
    tol: Optional[float] = None,
) -> ExactDistribution:
    """
    Law of xi_t by uniformization.

    With L the largest exit rate and P = I + Q/L, the law is
    sum_k Poisson(k; L t) * start P^k, truncated where the Poisson tail
    drops below tol.

    Args:
        gen: Generator
        start: Initial configuration, or an initial law (its time is added to t)
        t: Elapsed time (>= 0)
        tol: Dropped Poisson tail mass (default UNIFORMIZATION_TOL)

    Raises:
        ValueError: t < 0, or a start on a different site count
    """
    if t < 0:
        raise ValueError(f"Time must be nonnegative, got {t}")
    tol = get_config().UNIFORMIZATION_TOL if tol is None else tol

    if isinstance(start, ExactDistribution):
        if start.site_count != gen.site_count:
            raise ValueError("Initial law lives on a different site count")
        v = start.probabilities.astype(np.float64, copy=True)
        t0 = start.time
    else:
        if len(start) != gen.site_count:
            raise ValueError(f"Configuration has {len(start)} sites, generator {gen.site_count}")
        v = np.zeros(gen.state_count)
        v[encode_configuration(start)] = 1.0
        t0 = 0.0

    rate = gen.uniformization_rate
    if t == 0 or rate == 0:
        return ExactDistribution(t0 + t, v, gen.site_count, gen.lambda1, gen.lambda2)

    # row-vector iteration v <- v P, done as P^T v
    step = (sparse.identity(gen.state_count, format="csr") + gen.matrix / rate).T.tocsr()
    mean = rate * t
    kmax = int(poisson.isf(tol, mean)) + 1
    weights = poisson.pmf(np.arange(kmax + 1), mean)

    term = v
    acc = weights[0] * term
    for k in range(1, kmax + 1):
        term = step @ term
        acc += weights[k] * term

    acc = np.maximum(acc, 0.0)
    logger.debug(f"Uniformization: rate={rate:.4g}, t={t}, {kmax} terms, mass={acc.sum():.15f}")
    return ExactDistribution(t0 + t, acc, gen.site_count, gen.lambda1, gen.lambda2)


def marginal(dist: ExactDistribution, sites: Sequence[int]) -> MarginalTable:
    """
    Joint law over the listed sites.

    Raises:
        ValueError: Repeated or out-of-range sites
    """
    n = dist.site_count
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise ValueError(f"Repeated sites in marginal: {sites}")
    if any(not 0 <= s < n for s in sites):
        raise ValueError(f"Marginal sites {sites} outside 0..{n - 1}")

    # C-order reshape puts site n-1 on axis 0; reverse so axis k is site k
    full = dist.probabilities.reshape((3,) * n).transpose(tuple(range(n - 1, -1, -1)))
    drop = tuple(s for s in range(n) if s not in sites)
    table = full.sum(axis=drop) if drop else full
    kept = sorted(sites)
    table = np.transpose(table, [kept.index(s) for s in sites])
    return MarginalTable(sites=sites, table=np.ascontiguousarray(table), time=dist.time)


def total_variation(
    p: Union[ExactDistribution, np.ndarray],
    q: Union[ExactDistribution, np.ndarray],
) -> float:
    """Total variation distance between two laws on the same state space."""
    a = p.probabilities if isinstance(p, ExactDistribution) else np.asarray(p, dtype=float)
    b = q.probabilities if isinstance(q, ExactDistribution) else np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"Shape mismatch: {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def swap_types(dist: ExactDistribution) -> ExactDistribution:
    """Relabel types 1 <-> 2 (and the rates with them)."""
    n = dist.site_count
    digits = _digits(n).astype(np.int64)
    swapped = np.where(digits == 0, 0, 3 - digits)
    target = swapped @ (3 ** np.arange(n, dtype=np.int64))
    out = np.zeros_like(dist.probabilities)
    out[target] = dist.probabilities
    return ExactDistribution(dist.time, out, n, dist.lambda2, dist.lambda1)


def configuration_law(dist: ExactDistribution, top: int = 10) -> List[Tuple[str, float]]:
    """The `top` most likely configurations with their probabilities."""
    order = np.argsort(-dist.probabilities, kind="stable")[:top]
    return [(decode_state(int(i), dist.site_count).to_string(), float(dist.probabilities[i]))
            for i in order]
