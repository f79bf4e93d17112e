"""
Guarded-command protocols: white/blacklist (BW), maximal independent set
(MIS) and 1-minimal dominating set (MDS).

Every rule carries the priority gate: a node is forced out of a protocol
when an algorithm with a smaller priority id has already excluded it.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple

from graph_core import Graph, NodeId, NodeSet, induced_subgraph
from oracles import is_maximal_independent, is_minimal_dominating

if TYPE_CHECKING:  # pragma: no cover
    from stabilization_engine import AlgorithmStack, StackEntry

logger = logging.getLogger(__name__)


class Kind(str, Enum):
    """Protocol family."""
    BW = 'BW'
    MIS = 'MIS'
    MDS = 'MDS'

    def __str__(self) -> str:
        return self.value


class State(str, Enum):
    """Values of the per-node protocol variable x_a(i)."""
    OUT = 'out'
    WAIT = 'wait'
    IN = 'in'
    OUT1 = 'out1'
    OUT2 = 'out2'

    def __str__(self) -> str:
        return self.value


OUT_STATES = frozenset({State.OUT, State.OUT1, State.OUT2})

BW_RULES = ('RWait', 'RBack', 'RIn', 'ROut')
MIS_RULES = ('RWait', 'RBack', 'RIn', 'ROut')
MDS_RULES = ('RWait', 'RBack1', 'RBack2', 'RIn', 'ROut1', 'ROut2')

THREE_STATE_DOMAIN = (State.OUT, State.WAIT, State.IN)
FOUR_STATE_DOMAIN = (State.OUT1, State.OUT2, State.WAIT, State.IN)

Neighborhood = Sequence[Tuple[NodeId, State]]


def is_out(state: State) -> bool:
    """out, out1 and out2 all count as excluded."""
    return state in OUT_STATES


@dataclass(frozen=True, order=True)
class AlgorithmId:
    """Priority-ranked algorithm instance; a smaller priority gates larger ones."""

    priority: int
    kind: Kind
    label: str

    def __post_init__(self):
        if self.priority < 1:
            raise ValueError(f"priority must be positive, got {self.priority}")
        if not self.label:
            raise ValueError("algorithm label must be nonempty")

    def __str__(self) -> str:
        return self.label


def bw_guards(state: State, designation: State, gated: bool) -> List[str]:
    """
    Enabled white/blacklist rules at one node, in listing order.

    Args:
        state: Current x_BW(i)
        designation: BW(i), in for whitelisted and out for blacklisted
        gated: Some lower-id algorithm has x_a(i) = out

    Returns:
        Names of the rules whose guards hold
    """
    rules = []
    if is_out(state) and designation == State.IN and not gated:
        rules.append('RWait')
    if state == State.WAIT and (designation != State.IN or gated):
        rules.append('RBack')
    if state == State.WAIT and designation == State.IN and not gated:
        rules.append('RIn')
    if state in (State.IN, State.WAIT) and (designation == State.OUT or gated):
        rules.append('ROut')
    return rules


def mis_guards(node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
    """
    Enabled maximal-independent-set rules at one node, in listing order.

    Args:
        node: id(i), used for tie breaking between waiting neighbors
        state: Current x_MIS(i)
        neighbors: (id(k), x_MIS(k)) for every k in N(i)
        gated: Some lower-id algorithm has x_a(i) = out
    """
    has_in_neighbor = any(value == State.IN for _, value in neighbors)
    rules = []
    if is_out(state) and not has_in_neighbor and not gated:
        rules.append('RWait')
    if state == State.WAIT and (has_in_neighbor or gated):
        rules.append('RBack')
    if (
        state == State.WAIT
        and not has_in_neighbor
        and all(value != State.WAIT or other > node for other, value in neighbors)
        and not gated
    ):
        rules.append('RIn')
    if state == State.IN and (has_in_neighbor or gated):
        rules.append('ROut')
    return rules


def mds_guards(node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
    """
    Enabled 1-minimal-dominating-set rules at one node, in listing order.

    ROut1/ROut2 read the gate as a top-level disjunct:
    x = in ∧ [(|in-neighbors| = 1 ∧ no out1 neighbor) ∨ gated], and the
    same with > 1 for ROut2.
    """
    in_count = sum(1 for _, value in neighbors if value == State.IN)
    has_out1_neighbor = any(value == State.OUT1 for _, value in neighbors)
    smaller_waiting = any(value == State.WAIT and other < node for other, value in neighbors)
    rules = []
    if is_out(state) and in_count == 0 and not gated:
        rules.append('RWait')
    if state == State.WAIT and (in_count == 1 or gated):
        rules.append('RBack1')
    if state in (State.OUT1, State.WAIT) and (in_count > 1 or gated):
        rules.append('RBack2')
    if state == State.WAIT and in_count == 0 and not smaller_waiting and not gated:
        rules.append('RIn')
    if state == State.IN and ((in_count == 1 and not has_out1_neighbor) or gated):
        rules.append('ROut1')
    if state == State.IN and ((in_count > 1 and not has_out1_neighbor) or gated):
        rules.append('ROut2')
    return rules


@dataclass(frozen=True)
class Protocol:
    """Common shape of a protocol instance bound to an AlgorithmId."""

    algorithm: AlgorithmId

    kind: ClassVar[Optional[Kind]] = None
    rules: ClassVar[Tuple[str, ...]] = ()
    domain: ClassVar[Tuple[State, ...]] = ()
    targets: ClassVar[Dict[str, State]] = {}

    @property
    def out_state(self) -> State:
        return self.domain[0]

    def guards(self, node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
        raise NotImplementedError

    def target(self, rule: str, domain: Optional[Sequence[State]] = None) -> State:
        """
        Value assigned by a rule.

        A plain out is written as out1 when the variable's domain (shared
        mode) has no plain out.
        """
        value = self.targets[rule]
        if domain is not None and value not in domain and value == State.OUT:
            return State.OUT1
        return value


@dataclass(frozen=True)
class BWProtocol(Protocol):
    """White/blacklist protocol; unspecified designations default to in."""

    designation: Mapping[NodeId, State] = field(default_factory=dict, hash=False, compare=False)

    kind = Kind.BW
    rules = BW_RULES
    domain = THREE_STATE_DOMAIN
    targets = {'RWait': State.WAIT, 'RBack': State.OUT, 'RIn': State.IN, 'ROut': State.OUT}

    def designation_of(self, node: NodeId) -> State:
        return self.designation.get(node, State.IN)

    def guards(self, node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
        return bw_guards(state, self.designation_of(node), gated)


@dataclass(frozen=True)
class MISProtocol(Protocol):
    """Maximal independent set protocol with id tie breaking."""

    kind = Kind.MIS
    rules = MIS_RULES
    domain = THREE_STATE_DOMAIN
    targets = {'RWait': State.WAIT, 'RBack': State.OUT, 'RIn': State.IN, 'ROut': State.OUT}

    def guards(self, node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
        return mis_guards(node, state, neighbors, gated)


@dataclass(frozen=True)
class MDSProtocol(Protocol):
    """1-minimal dominating set protocol."""

    kind = Kind.MDS
    rules = MDS_RULES
    domain = FOUR_STATE_DOMAIN
    targets = {
        'RWait': State.WAIT,
        'RBack1': State.OUT1,
        'RBack2': State.OUT2,
        'RIn': State.IN,
        'ROut1': State.OUT1,
        'ROut2': State.OUT2,
    }

    def guards(self, node: NodeId, state: State, neighbors: Neighborhood, gated: bool) -> List[str]:
        return mds_guards(node, state, neighbors, gated)


PROTOCOL_TYPES = {Kind.BW: BWProtocol, Kind.MIS: MISProtocol, Kind.MDS: MDSProtocol}


def make_protocol(algorithm: AlgorithmId, designation: Optional[Mapping[NodeId, State]] = None) -> Protocol:
    """Instantiate the protocol matching algorithm.kind."""
    if algorithm.kind == Kind.BW:
        return BWProtocol(algorithm, dict(designation or {}))
    return PROTOCOL_TYPES[algorithm.kind](algorithm)


def in_set(c: Mapping[Tuple[NodeId, AlgorithmId], State], a: AlgorithmId) -> NodeSet:
    """Nodes whose value for algorithm a is in."""
    return frozenset(node for (node, algorithm), value in c.items() if algorithm == a and value == State.IN)


def column_state(c: Mapping, stack: 'AlgorithmStack', entry: 'StackEntry', column: NodeId) -> State:
    """
    Value of a tier as seen from a column.

    Column-level tiers report their own variable. A compacted tier reports
    out when a lower tier excludes the column, in when the column has no
    group or one of its groups is in, wait when one of its groups waits,
    and out otherwise.
    """
    slot = stack.slot(entry.algorithm)
    if entry.projection is None:
        return c.get((column, slot), State.IN)
    if gate(column, c, entry.algorithm.priority, stack):
        return State.OUT
    groups = entry.groups_of(column)
    if not groups:
        return State.IN
    values = [c[(group, slot)] for group in groups]
    if State.IN in values:
        return State.IN
    if State.WAIT in values:
        return State.WAIT
    return State.OUT


def gate(i: NodeId, c: Mapping, self_priority: int, stack: 'AlgorithmStack') -> bool:
    """
    The shared gating clause (∃a ∈ ALG)(a < self ∧ x_a(i) = out) at column i.

    Always false in shared (equal-priority) mode.
    """
    if stack.shared:
        return False
    for entry in stack.entries:
        if entry.algorithm.priority >= self_priority:
            break
        if is_out(column_state(c, stack, entry, i)):
            return True
    return False


def tier_gate(c: Mapping, stack: 'AlgorithmStack', entry: 'StackEntry', node: NodeId) -> bool:
    """Gate for a tier node; a compacted group-node is gated when all its columns are."""
    if stack.shared:
        return False
    priority = entry.algorithm.priority
    if entry.projection is None:
        return gate(node, c, priority, stack)
    columns = entry.projection.get(node, frozenset())
    return bool(columns) and all(gate(column, c, priority, stack) for column in columns)


def check_stable_invariants(g: Graph, stack: 'AlgorithmStack', c: Mapping) -> List[str]:
    """
    Properties every stabilized configuration must have.

    Returns:
        Human-readable violations; empty when all hold
    """
    violations = []
    for entry in stack.entries:
        algorithm = entry.algorithm
        slot = stack.slot(algorithm)
        graph = stack.tier_graph(entry, g)
        values = {node: c[(node, slot)] for node in graph.nodes}
        waiting = sorted(node for node, value in values.items() if value == State.WAIT)
        if waiting:
            violations.append(f"{algorithm}: nodes {waiting} stabilized in wait")

        ungated = frozenset(node for node in graph.nodes if not tier_gate(c, stack, entry, node))
        members = frozenset(node for node, value in values.items() if value == State.IN)

        if algorithm.kind == Kind.BW:
            for node, value in sorted(values.items()):
                designation = entry.protocol.designation_of(node)
                if designation == State.OUT and value != State.OUT:
                    violations.append(f"{algorithm}: blacklisted node {node} is {value}")
                if designation == State.IN and node in ungated and value != State.IN:
                    violations.append(f"{algorithm}: whitelisted ungated node {node} is {value}")
            continue

        if not members <= ungated:
            violations.append(f"{algorithm}: gated nodes {sorted(members - ungated)} are in")
        substrate = induced_subgraph(graph, ungated)
        if algorithm.kind == Kind.MIS and not is_maximal_independent(substrate, members & ungated):
            violations.append(f"{algorithm}: in-set is not maximal independent on its induced subgraph")
        if algorithm.kind == Kind.MDS and not is_minimal_dominating(substrate, members & ungated):
            violations.append(f"{algorithm}: in-set is not 1-minimal dominating on its induced subgraph")

    for violation in violations:
        logger.warning(violation)
    return violations
