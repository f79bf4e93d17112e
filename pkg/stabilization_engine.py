"""
Execution engine for stacks of guarded-command protocols.

A run repeatedly asks the scheduler to pick enabled (node, algorithm)
processes, fires the first enabled rule of each, and records every move
until nothing is enabled or the move budget is spent.
"""

import json
import logging
from collections.abc import Mapping as MappingABC
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import get_config
from graph_core import Graph, NodeId, NodeSet, UnknownNodeError
from protocols import (
    AlgorithmId,
    FOUR_STATE_DOMAIN,
    Kind,
    Protocol,
    State,
    column_state,
    in_set,
    tier_gate,
)

logger = logging.getLogger(__name__)


class StackError(ValueError):
    """Invalid algorithm stack: empty, duplicate labels or bad priorities."""


class AlreadyStableError(RuntimeError):
    """step() called on a configuration with nothing enabled."""

    def __init__(self, message: str = "already stable"):
        super().__init__(message)


class ConfigurationError(ValueError):
    """Initial configuration that does not fit the stack."""


@dataclass(frozen=True)
class StackEntry:
    """
    One tier of a stack.

    graph is the tier's own substrate (None means the run graph). A
    projection maps each tier node (a supplier group) to the columns it
    stands for; such a tier is gated and viewed per column.
    """

    protocol: Protocol
    graph: Optional[Graph] = None
    projection: Optional[Mapping[NodeId, NodeSet]] = None
    _columns_index: Dict[NodeId, NodeSet] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.projection is None:
            return
        if self.graph is None:
            raise StackError(f"{self.algorithm}: a projected tier needs its own graph")
        if frozenset(self.projection) != self.graph.nodes:
            raise StackError(f"{self.algorithm}: projection keys must equal the tier graph's nodes")
        index: Dict[NodeId, set] = {}
        for group, columns in self.projection.items():
            for column in columns:
                index.setdefault(column, set()).add(group)
        object.__setattr__(self, '_columns_index', {column: frozenset(groups) for column, groups in index.items()})

    @property
    def algorithm(self) -> AlgorithmId:
        return self.protocol.algorithm

    def groups_of(self, column: NodeId) -> NodeSet:
        """Group-nodes whose column set contains column."""
        return self._columns_index.get(column, frozenset())

    @property
    def columns(self) -> NodeSet:
        return frozenset(self._columns_index)


class AlgorithmStack:
    """
    Ordered protocol tiers.

    Priorities must be strictly increasing (hierarchical mode) or all
    equal (shared mode: one variable per node, no gating).
    """

    def __init__(self, entries: Sequence[StackEntry]):
        entries = list(entries)
        if not entries:
            raise StackError("algorithm stack must contain at least one entry")
        labels = [entry.algorithm.label for entry in entries]
        if len(set(labels)) != len(labels):
            raise StackError(f"duplicate algorithm labels in {labels}")
        priorities = [entry.algorithm.priority for entry in entries]
        increasing = all(a < b for a, b in zip(priorities, priorities[1:]))
        equal = len(set(priorities)) == 1
        if not increasing and not equal:
            raise StackError(f"priorities must be strictly increasing or all equal, got {priorities}")
        self._entries = tuple(entries)
        self._shared = equal and len(entries) > 1
        if self._shared and any(entry.projection is not None for entry in entries):
            raise StackError("shared mode needs column-level tiers; projections are not allowed")
        self._by_algorithm = {entry.algorithm: entry for entry in entries}

    @classmethod
    def of(cls, *protocols: Protocol) -> 'AlgorithmStack':
        """Stack whose tiers all run on the run graph."""
        return cls([StackEntry(protocol) for protocol in protocols])

    @property
    def entries(self) -> Tuple[StackEntry, ...]:
        return self._entries

    @property
    def shared(self) -> bool:
        return self._shared

    @property
    def algorithms(self) -> List[AlgorithmId]:
        return [entry.algorithm for entry in self._entries]

    @property
    def kinds(self) -> List[Kind]:
        return [entry.algorithm.kind for entry in self._entries]

    def entry(self, a: AlgorithmId) -> StackEntry:
        try:
            return self._by_algorithm[a]
        except KeyError:
            raise StackError(f"algorithm {a} is not in the stack") from None

    def by_label(self, label: str) -> StackEntry:
        for entry in self._entries:
            if entry.algorithm.label == label:
                return entry
        raise StackError(f"no tier labeled {label!r}")

    def slot(self, a: AlgorithmId) -> AlgorithmId:
        """Algorithm whose variable a reads and writes; the first entry's in shared mode."""
        if self._shared:
            return self._entries[0].algorithm
        return a

    def slots(self) -> List[AlgorithmId]:
        return [self._entries[0].algorithm] if self._shared else self.algorithms

    def domain_of(self, a: AlgorithmId) -> Tuple[State, ...]:
        """
        Value domain of a's variable.

        In shared mode the entries' domains are merged; plain out folds into
        out1 when the four-state domain is present.
        """
        if not self._shared:
            return self.entry(a).protocol.domain
        merged: List[State] = []
        for entry in self._entries:
            for value in entry.protocol.domain:
                if value not in merged:
                    merged.append(value)
        if State.OUT1 in merged and State.OUT in merged:
            merged.remove(State.OUT)
            merged.sort(key=lambda value: (FOUR_STATE_DOMAIN + (State.OUT,)).index(value))
        return tuple(merged)

    def tier_graph(self, entry: StackEntry, g: Graph) -> Graph:
        return entry.graph if entry.graph is not None else g

    def order(self, g: Graph) -> int:
        """Largest tier graph order."""
        return max(self.tier_graph(entry, g).order for entry in self._entries)

    def validate_against(self, g: Graph) -> None:
        """Check the tiers line up with the run graph's columns."""
        for entry in self._entries:
            if entry.projection is not None:
                stray = entry.columns - g.nodes
            else:
                stray = self.tier_graph(entry, g).nodes - g.nodes
            if stray:
                raise StackError(f"{entry.algorithm}: nodes {sorted(stray)} are not columns of the run graph")
        if self._shared:
            node_sets = {self.tier_graph(entry, g).nodes for entry in self._entries}
            if len(node_sets) != 1:
                raise StackError("shared-mode tiers must cover the same nodes")

    def in_set(self, c: Mapping, a: AlgorithmId) -> NodeSet:
        return in_set(c, self.slot(a))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[StackEntry]:
        return iter(self._entries)

    def __repr__(self) -> str:
        mode = 'shared' if self._shared else 'hierarchical'
        return f"AlgorithmStack({', '.join(map(str, self.algorithms))}; {mode})"


class Configuration(MappingABC):
    """Immutable map (node, algorithm) -> State."""

    __slots__ = ('_values', '_key')

    def __init__(self, values: Mapping[Tuple[NodeId, AlgorithmId], State]):
        self._values = dict(values)
        self._key = None

    def __getitem__(self, key: Tuple[NodeId, AlgorithmId]) -> State:
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def replace(self, updates: Mapping[Tuple[NodeId, AlgorithmId], State]) -> 'Configuration':
        values = dict(self._values)
        values.update(updates)
        return Configuration(values)

    def fingerprint(self) -> Tuple:
        """Hashable canonical form, used for revisit detection."""
        if self._key is None:
            self._key = tuple(sorted(
                ((node, algorithm.priority, algorithm.label, value.value) for (node, algorithm), value in self._values.items())
            ))
        return self._key

    def values_of(self, a: AlgorithmId) -> Dict[NodeId, State]:
        return {node: value for (node, algorithm), value in self._values.items() if algorithm == a}

    def to_dict(self, g: Graph, stack: AlgorithmStack) -> Dict[str, Dict[str, str]]:
        """Tier label -> {node label -> state}, the adversarial-file layout."""
        result = {}
        for slot in stack.slots():
            graph = stack.tier_graph(stack.entry(slot), g)
            values = self.values_of(slot)
            result[slot.label] = {graph.label(node): values[node].value for node in graph.sorted_nodes()}
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._values == other._values

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return f"Configuration({len(self._values)} values)"


@dataclass(frozen=True)
class MoveRecord:
    """One rule firing."""

    step: int
    node: NodeId
    algorithm: AlgorithmId
    rule: str
    old: State
    new: State

    def to_dict(self, label: Optional[str] = None) -> Dict[str, object]:
        return {
            'step': self.step,
            'node': label if label is not None else str(self.node),
            'algorithm': self.algorithm.label,
            'rule': self.rule,
            'old': self.old.value,
            'new': self.new.value,
        }


Trace = List[MoveRecord]


class SchedulerKind(str, Enum):
    CENTRAL_RANDOM = 'central-random'
    CENTRAL_ADVERSARIAL_MIN_ID = 'central-adversarial-min-id'
    CENTRAL_ADVERSARIAL_MAX_ID = 'central-adversarial-max-id'
    DISTRIBUTED_RANDOM_SUBSET = 'distributed-random-subset'
    DISTRIBUTED_ADVERSARIAL = 'distributed-adversarial'
    SYNCHRONOUS = 'synchronous'

    def __str__(self) -> str:
        return self.value

    @property
    def central(self) -> bool:
        return self.value.startswith('central')

    @property
    def deterministic(self) -> bool:
        return self not in (SchedulerKind.CENTRAL_RANDOM, SchedulerKind.DISTRIBUTED_RANDOM_SUBSET)


SCHEDULER_KINDS = [kind.value for kind in SchedulerKind]


@dataclass(frozen=True)
class SchedulerPolicy:
    kind: SchedulerKind = field(default_factory=lambda: SchedulerKind(get_config().DEFAULT_SCHEDULER))
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kind', SchedulerKind(self.kind))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def split_seed(seed: int) -> Tuple[int, int]:
    """Derive (scheduler seed, initial-state seed) from one request seed."""
    scheduler, initial = np.random.SeedSequence(seed).spawn(2)
    return (
        int(scheduler.generate_state(1, dtype=np.uint64)[0]),
        int(initial.generate_state(1, dtype=np.uint64)[0]),
    )


Process = Tuple[NodeId, AlgorithmId, List[str]]


def enabled_rules(g: Graph, stack: AlgorithmStack, c: Mapping, i: NodeId, a: AlgorithmId) -> List[str]:
    """
    Rules of algorithm a whose guard holds at node i under c.

    Nodes outside a's tier graph have no rules.
    """
    entry = stack.entry(a)
    graph = stack.tier_graph(entry, g)
    if not graph.has_node(i):
        return []
    slot = stack.slot(a)
    neighbors = [(k, c[(k, slot)]) for k in graph.neighbors(i)]
    gated = tier_gate(c, stack, entry, i)
    return entry.protocol.guards(i, c[(i, slot)], neighbors, gated)


def enabled_processes(g: Graph, stack: AlgorithmStack, c: Mapping) -> List[Process]:
    """Every enabled (node, algorithm) in stack order, then node id."""
    processes = []
    for entry in stack.entries:
        graph = stack.tier_graph(entry, g)
        for node in graph.sorted_nodes():
            rules = enabled_rules(g, stack, c, node, entry.algorithm)
            if rules:
                processes.append((node, entry.algorithm, rules))
    return processes


def is_stable(g: Graph, stack: AlgorithmStack, c: Mapping) -> bool:
    return not enabled_processes(g, stack, c)


def select_processes(processes: List[Process], policy: SchedulerPolicy, rng: np.random.Generator) -> List[Process]:
    """Apply the scheduler policy to a nonempty list of enabled processes."""
    kind = policy.kind
    if kind == SchedulerKind.CENTRAL_RANDOM:
        return [processes[int(rng.integers(len(processes)))]]
    if kind == SchedulerKind.CENTRAL_ADVERSARIAL_MIN_ID:
        return [min(processes, key=lambda p: (p[0], p[1].priority))]
    if kind == SchedulerKind.CENTRAL_ADVERSARIAL_MAX_ID:
        return [min(processes, key=lambda p: (-p[0], p[1].priority))]
    if kind == SchedulerKind.DISTRIBUTED_RANDOM_SUBSET:
        picks = rng.random(len(processes)) < 0.5
        chosen = [process for process, pick in zip(processes, picks) if pick]
        return chosen or [processes[int(rng.integers(len(processes)))]]
    if kind == SchedulerKind.DISTRIBUTED_ADVERSARIAL:
        top = max(process[1].priority for process in processes)
        return [process for process in processes if process[1].priority == top]
    return list(processes)


def step(
    g: Graph,
    stack: AlgorithmStack,
    c: Configuration,
    policy: SchedulerPolicy,
    rng: np.random.Generator,
    step_index: int = 0,
) -> Tuple[Configuration, List[MoveRecord]]:
    """
    Fire one scheduler step.

    Guards are read from the pre-step configuration; each selected
    process fires its first enabled rule. In shared mode only the first
    selected process at a node writes its variable.

    Raises:
        AlreadyStableError: nothing is enabled
    """
    processes = enabled_processes(g, stack, c)
    if not processes:
        raise AlreadyStableError()
    selected = select_processes(processes, policy, rng)

    updates = {}
    moves = []
    for node, algorithm, rules in selected:
        slot = stack.slot(algorithm)
        key = (node, slot)
        if key in updates:
            continue
        rule = rules[0]
        new = stack.entry(algorithm).protocol.target(rule, stack.domain_of(algorithm))
        updates[key] = new
        moves.append(MoveRecord(step_index, node, algorithm, rule, c[key], new))
        logger.debug(f"step {step_index}: {algorithm} node {node} {rule} {c[key]}->{new}")
    return c.replace(updates), moves


@dataclass
class RunResult:
    """Outcome of run_to_stabilization; unpacks as (final, trace, stabilized)."""

    final: Configuration
    trace: Trace
    stabilized: bool
    livelock: bool = False
    steps: int = 0
    max_moves: int = 0
    revisit_step: Optional[int] = None

    @property
    def moves(self) -> int:
        return len(self.trace)

    def __iter__(self):
        return iter((self.final, self.trace, self.stabilized))

    def moves_by_algorithm(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for move in self.trace:
            counts[move.algorithm.label] = counts.get(move.algorithm.label, 0) + 1
        return counts


def default_max_moves(g: Graph, stack: AlgorithmStack) -> int:
    return max(get_config().MAX_MOVES_FACTOR * combined_bound(stack, stack.order(g)), 1)


def run_to_stabilization(
    g: Graph,
    stack: AlgorithmStack,
    initial: Configuration,
    policy: SchedulerPolicy,
    max_moves: Optional[int] = None,
    detect_revisits: Optional[bool] = None,
) -> RunResult:
    """
    Step until nothing is enabled or the move budget is spent.

    Args:
        g: Run graph (columns)
        stack: Protocol tiers
        initial: Starting configuration
        policy: Scheduler kind and seed
        max_moves: Budget; defaults to MAX_MOVES_FACTOR x combined_bound
        detect_revisits: Stop on a repeated configuration. Defaults to on for
            deterministic policies on graphs up to REVISIT_NODE_LIMIT nodes

    Returns:
        RunResult; stabilized is False on budget exhaustion or livelock
    """
    if max_moves is None:
        max_moves = default_max_moves(g, stack)
    if max_moves <= 0:
        raise ValueError(f"max_moves must be positive, got {max_moves}")
    if detect_revisits is None:
        detect_revisits = policy.kind.deterministic and stack.order(g) <= get_config().REVISIT_NODE_LIMIT
    stack.validate_against(g)

    rng = policy.rng()
    current = initial
    trace: Trace = []
    seen = {current.fingerprint(): 0} if detect_revisits else None
    steps = 0
    logger.info(f"Run start: {stack!r} on {g!r}, scheduler {policy.kind} seed {policy.seed}, budget {max_moves}")

    while len(trace) < max_moves:
        if is_stable(g, stack, current):
            logger.info(f"Stabilized after {len(trace)} moves in {steps} steps")
            return RunResult(current, trace, True, steps=steps, max_moves=max_moves)
        current, moves = step(g, stack, current, policy, rng, step_index=steps)
        trace.extend(moves)
        steps += 1
        if seen is not None:
            fingerprint = current.fingerprint()
            if fingerprint in seen:
                logger.info(f"Livelock: step {steps} revisits the configuration of step {seen[fingerprint]}")
                return RunResult(current, trace, False, livelock=True, steps=steps,
                                 max_moves=max_moves, revisit_step=seen[fingerprint])
            seen[fingerprint] = steps

    stabilized = is_stable(g, stack, current)
    if not stabilized:
        logger.info(f"Move budget of {max_moves} exhausted after {steps} steps")
    return RunResult(current, trace, stabilized, steps=steps, max_moves=max_moves)


def random_configuration(g: Graph, stack: AlgorithmStack, seed: int) -> Configuration:
    """Every value drawn uniformly from its domain; deterministic per seed."""
    rng = np.random.default_rng(seed)
    values = {}
    for slot in stack.slots():
        domain = stack.domain_of(slot)
        for node in stack.tier_graph(stack.entry(slot), g).sorted_nodes():
            values[(node, slot)] = domain[int(rng.integers(len(domain)))]
    return Configuration(values)


def all_out_configuration(g: Graph, stack: AlgorithmStack) -> Configuration:
    """Every variable at its domain's out-state."""
    values = {}
    for slot in stack.slots():
        out_state = stack.domain_of(slot)[0]
        for node in stack.tier_graph(stack.entry(slot), g).nodes:
            values[(node, slot)] = out_state
    return Configuration(values)


def load_configuration(g: Graph, stack: AlgorithmStack, data: Mapping[str, Mapping[str, str]]) -> Configuration:
    """
    Build a configuration from tier label -> {node label -> state}.

    Unlisted nodes start at the out-state.

    Raises:
        ConfigurationError: unknown tier, node or state, or a state outside the domain
    """
    base = all_out_configuration(g, stack)
    updates = {}
    for tier_label, assignments in (data or {}).items():
        try:
            entry = stack.by_label(str(tier_label))
        except StackError as e:
            raise ConfigurationError(str(e)) from None
        slot = stack.slot(entry.algorithm)
        graph = stack.tier_graph(entry, g)
        domain = stack.domain_of(slot)
        for node_label, text in (assignments or {}).items():
            try:
                node = graph.node_id(str(node_label))
            except UnknownNodeError:
                raise ConfigurationError(f"{tier_label}: unknown node {node_label!r}") from None
            try:
                value = State(str(text))
            except ValueError:
                raise ConfigurationError(f"{tier_label}: unknown state {text!r}") from None
            if value not in domain:
                raise ConfigurationError(f"{tier_label}: state {value} is outside {[str(v) for v in domain]}")
            updates[(node, slot)] = value
    return base.replace(updates)


def replay_violations(g: Graph, stack: AlgorithmStack, initial: Configuration, trace: Trace) -> List[str]:
    """Moves whose rule was not the first enabled rule in the pre-step configuration."""
    violations = []
    current = initial
    position = 0
    while position < len(trace):
        index = trace[position].step
        batch = []
        while position < len(trace) and trace[position].step == index:
            batch.append(trace[position])
            position += 1
        updates = {}
        for move in batch:
            rules = enabled_rules(g, stack, current, move.node, move.algorithm)
            if not rules or rules[0] != move.rule:
                violations.append(f"step {index}: {move.algorithm} node {move.node} fired {move.rule}, enabled {rules}")
            key = (move.node, stack.slot(move.algorithm))
            if current[key] != move.old:
                violations.append(f"step {index}: {move.algorithm} node {move.node} recorded old {move.old}, was {current[key]}")
            updates[key] = move.new
        current = current.replace(updates)
    return violations


def moves_after_lower_stable(trace: Trace, a: AlgorithmId, nodes: Optional[NodeSet] = None) -> int:
    """
    Moves of a after the last move of any algorithm with a smaller priority.

    Args:
        trace: Complete trace
        a: Algorithm to count
        nodes: Optionally restrict the count to these nodes
    """
    last_lower = -1
    for position, move in enumerate(trace):
        if move.algorithm.priority < a.priority:
            last_lower = position
    return sum(
        1 for move in trace[last_lower + 1:]
        if move.algorithm == a and (nodes is None or move.node in nodes)
    )


def moves_after_settled(trace: Trace, a: AlgorithmId, ungated: NodeSet) -> int:
    """
    Moves of a at ungated nodes once lower tiers and a's own gated nodes
    have made their last move.

    From that point the tier runs unmodified on its induced subgraph, with
    gated neighbors parked in a state no guard reads.
    """
    last_settling = -1
    for position, move in enumerate(trace):
        if move.algorithm.priority < a.priority or (move.algorithm == a and move.node not in ungated):
            last_settling = position
    return sum(1 for move in trace[last_settling + 1:] if move.algorithm == a and move.node in ungated)


def bound_for(kind: Union[Kind, str], n: int) -> int:
    """Per-protocol move ceiling: BW 2n, MIS max(3n-5, 2n), MDS 4n."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    kind = Kind(kind)
    if kind == Kind.BW:
        return 2 * n
    if kind == Kind.MIS:
        return max(3 * n - 5, 2 * n)
    return 4 * n


def combined_bound(stack: Union[AlgorithmStack, Sequence[Union[Kind, str]]], n: int) -> int:
    """Sum over k of the product of the first k tier bounds."""
    kinds = stack.kinds if isinstance(stack, AlgorithmStack) else [Kind(kind) for kind in stack]
    total = 0
    product = 1
    for kind in kinds:
        product *= bound_for(kind, n)
        total += product
    return total


def three_tier_polynomial(n: int) -> int:
    """Closed form of combined_bound for [BW, MIS, MDS] when n >= 5."""
    return 24 * n ** 3 - 34 * n ** 2 - 8 * n


@dataclass
class TierBound:
    label: str
    kind: Kind
    n: int
    total_moves: int
    moves_after_lower: int
    gated_moves: int
    checked_moves: int
    bound: int

    @property
    def passed(self) -> bool:
        return self.moves_after_lower <= self.bound

    def to_dict(self) -> Dict[str, object]:
        return {
            'label': self.label,
            'kind': self.kind.value,
            'n': self.n,
            'total_moves': self.total_moves,
            'moves_after_lower': self.moves_after_lower,
            'gated_moves': self.gated_moves,
            'checked_moves': self.checked_moves,
            'bound': self.bound,
            'passed': self.passed,
        }


@dataclass
class BoundReport:
    tiers: List[TierBound]
    total_moves: int
    combined_n: int
    combined_bound: int

    @property
    def combined_passed(self) -> bool:
        return self.total_moves <= self.combined_bound

    @property
    def passed(self) -> bool:
        return self.combined_passed and all(tier.passed for tier in self.tiers)

    def to_dict(self) -> Dict[str, object]:
        return {
            'tiers': [tier.to_dict() for tier in self.tiers],
            'total_moves': self.total_moves,
            'combined_n': self.combined_n,
            'combined_bound': self.combined_bound,
            'combined_passed': self.combined_passed,
            'passed': self.passed,
        }


def bound_report(g: Graph, stack: AlgorithmStack, final: Mapping, trace: Trace) -> BoundReport:
    """
    Per-tier move counts against their ceilings.

    A tier's bound uses n of its induced subgraph (nodes not gated in the
    final configuration) and is checked against the moves made there
    after the last lower-tier move. Moves at gated nodes in that window
    and the moves left once the tier's own gated nodes settled are
    reported alongside.
    """
    tiers = []
    for entry in stack.entries:
        algorithm = entry.algorithm
        graph = stack.tier_graph(entry, g)
        ungated = frozenset(node for node in graph.nodes if not tier_gate(final, stack, entry, node))
        after_all = moves_after_lower_stable(trace, algorithm)
        after_ungated = moves_after_lower_stable(trace, algorithm, ungated)
        tier = TierBound(
            label=algorithm.label,
            kind=algorithm.kind,
            n=len(ungated),
            total_moves=sum(1 for move in trace if move.algorithm == algorithm),
            moves_after_lower=after_ungated,
            gated_moves=after_all - after_ungated,
            checked_moves=moves_after_settled(trace, algorithm, ungated),
            bound=bound_for(algorithm.kind, len(ungated)),
        )
        if not tier.passed:
            logger.warning(
                f"{algorithm}: {tier.moves_after_lower} moves after lower tiers stabilized exceed bound "
                f"{tier.bound} (n={tier.n}); {tier.checked_moves} after gated nodes settled"
            )
        tiers.append(tier)

    n = stack.order(g)
    report = BoundReport(tiers, len(trace), n, combined_bound(stack, n))
    if not report.combined_passed:
        logger.warning(f"{len(trace)} moves exceed the combined bound {report.combined_bound}")
    return report


def node_label(g: Graph, stack: AlgorithmStack, move: MoveRecord) -> str:
    return stack.tier_graph(stack.entry(move.algorithm), g).label(move.node)


def trace_to_jsonl(g: Graph, stack: AlgorithmStack, trace: Trace) -> str:
    """One JSON object per move, node labels resolved per tier."""
    return ''.join(json.dumps(move.to_dict(node_label(g, stack, move))) + '\n' for move in trace)


def write_trace(path: Union[str, Path], g: Graph, stack: AlgorithmStack, trace: Trace) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trace_to_jsonl(g, stack, trace), encoding='utf-8')
    logger.info(f"Trace written to {path}")
    return path


def column_view(g: Graph, stack: AlgorithmStack, c: Mapping, a: AlgorithmId) -> Dict[NodeId, State]:
    """a's state at every column of g, projecting compacted tiers back onto columns."""
    entry = stack.entry(a)
    if entry.projection is None:
        graph = stack.tier_graph(entry, g)
        slot = stack.slot(a)
        return {node: c[(node, slot)] for node in g.sorted_nodes() if graph.has_node(node)}
    return {column: column_state(c, stack, entry, column) for column in g.sorted_nodes()}
