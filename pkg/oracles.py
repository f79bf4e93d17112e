"""
Exhaustive ground truth for set properties, the domination chain and the
joint feasibility of an independent and a dominating requirement.

Everything here enumerates subsets; it is exact and only meant for small
graphs (see the ENUMERATION_CAP setting).
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from config import get_config
from graph_core import Graph, NodeId, NodeSet, UnknownNodeError

logger = logging.getLogger(__name__)

CONVENTIONS = ('any', 'all')


class EnumerationCapError(ValueError):
    """Graph too large for exhaustive enumeration."""

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(f"graph has {n} nodes; enumeration cap is {cap}")


class NodeSetMismatchError(ValueError):
    """The graphs of a joint query do not cover the shared node set."""


class _Masks:
    """Bitmask view of a graph: bit k stands for the k-th smallest node id."""

    def __init__(self, g: Graph):
        self.order = g.sorted_nodes()
        self.index = {node: k for k, node in enumerate(self.order)}
        self.full = (1 << len(self.order)) - 1
        self.open = []
        self.closed = []
        for node in self.order:
            mask = 0
            for other in g.neighbors(node):
                mask |= 1 << self.index[other]
            self.open.append(mask)
            self.closed.append(mask | (1 << self.index[node]))

    def encode(self, s) -> int:
        mask = 0
        for node in s:
            if node not in self.index:
                raise UnknownNodeError(node)
            mask |= 1 << self.index[node]
        return mask

    def decode(self, mask: int) -> NodeSet:
        return frozenset(node for k, node in enumerate(self.order) if mask >> k & 1)

    def bits(self, mask: int) -> List[int]:
        return [k for k in range(len(self.order)) if mask >> k & 1]

    def cover(self, mask: int) -> int:
        covered = 0
        for k in self.bits(mask):
            covered |= self.closed[k]
        return covered

    def independent(self, mask: int) -> bool:
        return all(not self.open[k] & mask for k in self.bits(mask))

    def maximal_independent(self, mask: int) -> bool:
        return self.independent(mask) and self.cover(mask) == self.full

    def dominating(self, mask: int) -> bool:
        return self.cover(mask) == self.full

    def minimal_dominating(self, mask: int) -> bool:
        if not self.dominating(mask):
            return False
        return all(self.cover(mask & ~(1 << k)) != self.full for k in self.bits(mask))

    def irredundant(self, mask: int) -> bool:
        for k in self.bits(mask):
            if not self.closed[k] & ~self.cover(mask & ~(1 << k)):
                return False
        return True

    def maximal_irredundant(self, mask: int) -> bool:
        if not self.irredundant(mask):
            return False
        return all(
            not self.irredundant(mask | (1 << k))
            for k in range(len(self.order)) if not mask >> k & 1
        )


def _check_cap(n: int, cap: Optional[int]) -> None:
    cap = get_config().ENUMERATION_CAP if cap is None else cap
    if n > cap:
        raise EnumerationCapError(n, cap)


def is_independent(g: Graph, s: NodeSet) -> bool:
    """No edge of g has both endpoints in s."""
    masks = _Masks(g)
    return masks.independent(masks.encode(s))


def is_maximal_independent(g: Graph, s: NodeSet) -> bool:
    """Independent, and every node outside s has a neighbor in s."""
    masks = _Masks(g)
    return masks.maximal_independent(masks.encode(s))


def is_dominating(g: Graph, s: NodeSet) -> bool:
    """N[s] = V."""
    masks = _Masks(g)
    return masks.dominating(masks.encode(s))


def is_minimal_dominating(g: Graph, s: NodeSet) -> bool:
    """Dominating, and removing any single member breaks domination."""
    masks = _Masks(g)
    return masks.minimal_dominating(masks.encode(s))


def is_irredundant(g: Graph, s: NodeSet) -> bool:
    """Every member of s has a private neighbor: N[s - {v}] != N[s]."""
    masks = _Masks(g)
    return masks.irredundant(masks.encode(s))


def _all_masks(masks: _Masks) -> Iterator[int]:
    return iter(range(masks.full + 1))


def all_maximal_independent_sets(g: Graph, cap: Optional[int] = None) -> List[NodeSet]:
    """Every maximal independent set of g."""
    _check_cap(g.order, cap)
    masks = _Masks(g)
    return [masks.decode(mask) for mask in _all_masks(masks) if masks.maximal_independent(mask)]


def all_minimal_dominating_sets(g: Graph, cap: Optional[int] = None) -> List[NodeSet]:
    """Every 1-minimal dominating set of g."""
    _check_cap(g.order, cap)
    masks = _Masks(g)
    return [masks.decode(mask) for mask in _all_masks(masks) if masks.minimal_dominating(mask)]


def _irredundant_masks(masks: _Masks) -> Iterator[int]:
    # Irredundance is hereditary, so a branch stops at the first redundant set.
    stack = [(0, 0)]
    while stack:
        mask, start = stack.pop()
        yield mask
        for k in range(start, len(masks.order)):
            extended = mask | (1 << k)
            if masks.irredundant(extended):
                stack.append((extended, k + 1))


def all_maximal_irredundant_sets(g: Graph, cap: Optional[int] = None) -> List[NodeSet]:
    """Every maximal irredundant set of g, found by depth-first search."""
    _check_cap(g.order, cap)
    masks = _Masks(g)
    found = sorted(mask for mask in _irredundant_masks(masks) if masks.maximal_irredundant(mask))
    return [masks.decode(mask) for mask in found]


@dataclass(frozen=True)
class DominationChain:
    """The six chain parameters; witnesses hold one set attaining each."""

    ir: int
    gamma: int
    i_g: int
    beta0: int
    gamma_upper: int
    ir_upper: int
    witnesses: Dict[str, NodeSet] = field(default_factory=dict, compare=False)

    NAMES = ('ir', 'gamma', 'i_g', 'beta0', 'gamma_upper', 'ir_upper')

    def as_tuple(self) -> Tuple[int, ...]:
        return tuple(getattr(self, name) for name in self.NAMES)

    def is_ordered(self) -> bool:
        """ir <= gamma <= i <= beta0 <= Gamma <= IR."""
        values = self.as_tuple()
        return all(a <= b for a, b in zip(values, values[1:]))

    def to_dict(self) -> Dict[str, int]:
        return dict(zip(self.NAMES, self.as_tuple()))


def _extremes(sets: Sequence[NodeSet]) -> Tuple[NodeSet, NodeSet]:
    ordered = sorted(sets, key=lambda s: (len(s), sorted(s)))
    smallest = ordered[0]
    largest = max(ordered, key=len)
    return smallest, largest


def domination_chain(g: Graph, cap: Optional[int] = None) -> DominationChain:
    """
    Compute the domination chain of g by enumeration.

    Args:
        g: Graph with at most cap nodes
        cap: Enumeration cap; defaults to the active ENUMERATION_CAP

    Returns:
        DominationChain with a witness per parameter

    Raises:
        EnumerationCapError: g.order exceeds the cap
    """
    _check_cap(g.order, cap)
    logger.debug(f"Enumerating domination chain on {g!r}")
    low_ir, high_ir = _extremes(all_maximal_irredundant_sets(g, cap=g.order))
    low_dom, high_dom = _extremes(all_minimal_dominating_sets(g, cap=g.order))
    low_ind, high_ind = _extremes(all_maximal_independent_sets(g, cap=g.order))
    witnesses = {
        'ir': low_ir, 'gamma': low_dom, 'i_g': low_ind,
        'beta0': high_ind, 'gamma_upper': high_dom, 'ir_upper': high_ir,
    }
    chain = DominationChain(
        ir=len(low_ir), gamma=len(low_dom), i_g=len(low_ind),
        beta0=len(high_ind), gamma_upper=len(high_dom), ir_upper=len(high_ir),
        witnesses=witnesses,
    )
    if not chain.is_ordered():
        logger.warning(f"Domination chain out of order on {g!r}: {chain.to_dict()}")
    return chain


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a joint feasibility search."""

    feasible: bool
    witness: Optional[NodeSet]
    sets_examined: int
    convention: Optional[str] = None

    def describe(self, g: Optional[Graph] = None) -> str:
        if not self.feasible:
            return 'infeasible'
        members = sorted(self.witness)
        shown = g.labels_of(members) if g is not None else [str(node) for node in members]
        return 'feasible, witness {' + ', '.join(shown) + '}'


def selected_groups(
    columns: NodeSet,
    projection: Mapping[NodeId, NodeSet],
    convention: str = 'any',
) -> NodeSet:
    """
    Group-nodes selected by a column set.

    'any' selects every group touching the columns; 'all' selects the
    groups whose columns all lie in the set.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if convention == 'any':
        return frozenset(group for group, members in projection.items() if members & columns)
    return frozenset(group for group, members in projection.items() if members and members <= columns)


def joint_feasibility(
    g_mis: Graph,
    g_mds: Graph,
    shared_nodes: NodeSet,
    projection: Optional[Mapping[NodeId, NodeSet]] = None,
    convention: str = 'any',
    cap: Optional[int] = None,
) -> FeasibilityVerdict:
    """
    Search for one node set that is maximal independent on g_mis and
    dominating on g_mds.

    Without a projection both graphs must be over shared_nodes. With one,
    g_mis is a group graph: a candidate column set selects groups per the
    convention, and is admissible when those groups form a maximal
    independent set of g_mis and the columns lie inside them.

    Raises:
        NodeSetMismatchError: the graphs do not line up with shared_nodes
        EnumerationCapError: too many shared nodes
    """
    shared_nodes = frozenset(shared_nodes)
    if g_mds.nodes != shared_nodes:
        raise NodeSetMismatchError("dominating-side graph must be over the shared nodes")
    if projection is None:
        if g_mis.nodes != shared_nodes:
            raise NodeSetMismatchError("independent-side graph must be over the shared nodes")
    else:
        if frozenset(projection) != g_mis.nodes:
            raise NodeSetMismatchError("projection keys must be the independent-side graph's nodes")
        stray = frozenset().union(*projection.values()) - shared_nodes if projection else frozenset()
        if stray:
            raise NodeSetMismatchError(f"projection references unshared nodes {sorted(stray)}")
    _check_cap(len(shared_nodes), cap)

    mds_masks = _Masks(g_mds)
    mis_masks = _Masks(g_mis)
    ordered = sorted(shared_nodes)
    examined = 0
    for size in range(len(ordered) + 1):
        for candidate in combinations(ordered, size):
            examined += 1
            columns = frozenset(candidate)
            if not mds_masks.dominating(mds_masks.encode(columns)):
                continue
            if projection is None:
                if not mis_masks.maximal_independent(mis_masks.encode(columns)):
                    continue
            else:
                groups = selected_groups(columns, projection, convention)
                if not mis_masks.maximal_independent(mis_masks.encode(groups)):
                    continue
                covered = frozenset().union(*(projection[group] for group in groups)) if groups else frozenset()
                if not columns <= covered:
                    continue
            logger.info(f"Joint feasibility witness {sorted(columns)} after {examined} sets")
            return FeasibilityVerdict(True, columns, examined, convention if projection else None)

    logger.info(f"Joint feasibility: infeasible after {examined} sets")
    return FeasibilityVerdict(False, None, examined, convention if projection else None)
