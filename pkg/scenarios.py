"""
IP-risk scenarios: columns, supplier tables, parts flow and white/blacklists.

Builds the graphs the protocols run on, assembles the prioritized stack
and turns a finished run into a risk report.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from graph_core import Graph, GraphError, NodeId, NodeSet, assign_node_ids, to_dot, warn_if_disconnected
from oracles import FeasibilityVerdict, joint_feasibility
from protocols import AlgorithmId, Kind, State, check_stable_invariants, is_out, make_protocol
from stabilization_engine import (
    AlgorithmStack,
    BoundReport,
    Configuration,
    RunResult,
    SchedulerKind,
    SchedulerPolicy,
    StackEntry,
    StackError,
    Trace,
    all_out_configuration,
    bound_report,
    column_view,
    is_stable,
    run_to_stabilization,
)
from utils import format_labels

logger = logging.getLogger(__name__)

SUBSTRATE_COLUMNS = 'columns'
SUBSTRATE_SUPPLIERS = 'suppliers'
SUBSTRATE_COMPACTED = 'compacted-suppliers'
SUBSTRATE_FLOW = 'flow'
SUBSTRATES = (SUBSTRATE_COLUMNS, SUBSTRATE_SUPPLIERS, SUBSTRATE_COMPACTED, SUBSTRATE_FLOW)

DEFAULT_SUBSTRATES = {
    Kind.BW: SUBSTRATE_COLUMNS,
    Kind.MIS: SUBSTRATE_COMPACTED,
    Kind.MDS: SUBSTRATE_FLOW,
}

SUPPLIER_MODES = ('compacted', 'full')


class ScenarioError(ValueError):
    """Invalid scenario input, with the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class Column(BaseModel):
    """A grid location in the hall, e.g. I13."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    label: str = Field(min_length=1)
    id: Optional[int] = Field(default=None, ge=1)


class FlowEdge(BaseModel):
    """Parts moving from one column to another."""

    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    source: str = Field(alias='from', min_length=1)
    target: str = Field(alias='to', min_length=1)
    directed: bool = True


class Tier(BaseModel):
    """One stack declaration; its priority is its position."""

    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    kind: Kind
    label: str = Field(min_length=1)
    list_name: Optional[str] = Field(default=None, alias='list')
    substrate: Optional[Literal['columns', 'suppliers', 'compacted-suppliers', 'flow']] = None


def _known_columns(info: ValidationInfo) -> Optional[FrozenSet[str]]:
    columns = info.data.get('columns')
    if columns is None:
        return None
    return frozenset(column.label for column in columns)


def _check_known(labels: Iterable[str], info: ValidationInfo, where: str) -> None:
    known = _known_columns(info)
    if known is None:
        return
    unknown = sorted(set(labels) - known)
    if unknown:
        raise ValueError(f"{where} references unknown columns {unknown}")


class Scenario(BaseModel):
    """
    Parsed scenario file.

    Sections: columns, lists (BW designations), suppliers (column ->
    supplier names), public_suppliers, flow, edges and stack.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = 'scenario'
    columns: List[Column]
    lists: Dict[str, Dict[str, Literal['in', 'out']]] = Field(default_factory=dict)
    suppliers: Dict[str, List[str]] = Field(default_factory=dict)
    public_suppliers: List[str] = Field(default_factory=list)
    flow: List[FlowEdge] = Field(default_factory=list)
    edges: List[Tuple[str, str]] = Field(default_factory=list)
    stack: List[Tier] = Field(default_factory=list)
    equal_priority: bool = False

    @field_validator('columns', mode='before')
    @classmethod
    def _columns_from_labels(cls, value):
        if isinstance(value, list):
            return [{'label': str(item)} if isinstance(item, (str, int)) else item for item in value]
        return value

    @field_validator('columns')
    @classmethod
    def _unique_columns(cls, value: List[Column]) -> List[Column]:
        labels = [column.label for column in value]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"duplicate column labels {duplicates}")
        ids = [column.id for column in value if column.id is not None]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate explicit column ids")
        return value

    @field_validator('lists')
    @classmethod
    def _lists_known(cls, value, info: ValidationInfo):
        for name, designation in value.items():
            _check_known(designation, info, f"list {name!r}")
        return value

    @field_validator('suppliers')
    @classmethod
    def _suppliers_known(cls, value, info: ValidationInfo):
        _check_known(value, info, 'suppliers')
        for column, names in value.items():
            if any(not name for name in names):
                raise ValueError(f"column {column!r} has an empty supplier name")
        return value

    @field_validator('public_suppliers')
    @classmethod
    def _public_known(cls, value, info: ValidationInfo):
        suppliers = info.data.get('suppliers')
        if suppliers is not None:
            known = {name for names in suppliers.values() for name in names}
            unknown = sorted(set(value) - known)
            if unknown:
                raise ValueError(f"unknown public suppliers {unknown}")
        return value

    @field_validator('flow', mode='before')
    @classmethod
    def _flow_from_pairs(cls, value):
        if isinstance(value, list):
            return [{'from': item[0], 'to': item[1]} if isinstance(item, (list, tuple)) else item for item in value]
        return value

    @field_validator('flow')
    @classmethod
    def _flow_known(cls, value: List[FlowEdge], info: ValidationInfo):
        for edge in value:
            if edge.source == edge.target:
                raise ValueError(f"flow self-loop on {edge.source!r}")
            _check_known((edge.source, edge.target), info, 'flow')
        return value

    @field_validator('edges')
    @classmethod
    def _edges_known(cls, value, info: ValidationInfo):
        for u, v in value:
            if u == v:
                raise ValueError(f"edge self-loop on {u!r}")
            _check_known((u, v), info, 'edges')
        return value

    @field_validator('stack')
    @classmethod
    def _stack_consistent(cls, value: List[Tier], info: ValidationInfo):
        labels = [tier.label for tier in value]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate tier labels {labels}")
        lists = info.data.get('lists') or {}
        for tier in value:
            if tier.list_name is not None:
                if tier.kind != Kind.BW:
                    raise ValueError(f"tier {tier.label!r}: only BW tiers take a list")
                if tier.list_name not in lists:
                    raise ValueError(f"tier {tier.label!r} references unknown list {tier.list_name!r}")
        return value

    def column_ids(self) -> Dict[str, NodeId]:
        explicit = {column.label: column.id for column in self.columns if column.id is not None}
        return assign_node_ids([column.label for column in self.columns], explicit)

    def supplier_table(self, extra_public: Iterable[str] = ()) -> 'SupplierTable':
        return SupplierTable(
            self.column_ids(),
            {column: frozenset(names) for column, names in self.suppliers.items()},
            frozenset(self.public_suppliers) | frozenset(extra_public),
        )


@dataclass(frozen=True)
class SupplierTable:
    """Which suppliers are visible at which column."""

    columns: Mapping[str, NodeId]
    assignments: Mapping[str, FrozenSet[str]]
    public: FrozenSet[str] = frozenset()

    @classmethod
    def from_rows(cls, rows: Mapping[str, Iterable[str]], public: Iterable[str] = ()) -> 'SupplierTable':
        """Rows of column -> suppliers; ids follow row order."""
        ids = assign_node_ids(list(rows))
        return cls(ids, {column: frozenset(names) for column, names in rows.items()}, frozenset(public))

    def with_public(self, names: Iterable[str]) -> 'SupplierTable':
        return SupplierTable(self.columns, self.assignments, self.public | frozenset(names))

    def suppliers(self) -> List[str]:
        return sorted({name for names in self.assignments.values() for name in names})

    def columns_of(self, supplier: str) -> List[str]:
        """Columns showing supplier, in column order."""
        return [column for column in self.columns if supplier in self.assignments.get(column, ())]


def _group_label(columns: Sequence[str]) -> str:
    if all(len(column) == 1 for column in columns):
        return ''.join(columns)
    return '+'.join(columns)


def build_full_supplier_graph(t: SupplierTable) -> Graph:
    """Columns, with a clique per non-public supplier."""
    edges = set()
    for supplier in t.suppliers():
        if supplier in t.public:
            continue
        members = [t.columns[column] for column in t.columns_of(supplier)]
        edges.update(tuple(sorted(pair)) for pair in combinations(members, 2))
    labels = {node: column for column, node in t.columns.items()}
    return Graph(t.columns.values(), sorted(edges), labels)


def build_compacted_supplier_graph(t: SupplierTable) -> Tuple[Graph, Dict[NodeId, NodeSet]]:
    """
    One node per supplier, labeled by its columns (e.g. "BCD").

    Two group-nodes are adjacent iff their column sets intersect; public
    suppliers keep their node but get no edges.

    Returns:
        (graph, group-node -> column ids)
    """
    groups: Dict[NodeId, NodeSet] = {}
    labels: Dict[NodeId, str] = {}
    public_nodes = set()
    for node, supplier in enumerate((s for s in t.suppliers() if t.columns_of(s)), start=1):
        columns = t.columns_of(supplier)
        groups[node] = frozenset(t.columns[column] for column in columns)
        labels[node] = _group_label(columns)
        if supplier in t.public:
            public_nodes.add(node)
    edges = [
        (u, v) for u, v in combinations(sorted(groups), 2)
        if u not in public_nodes and v not in public_nodes and groups[u] & groups[v]
    ]
    return Graph(groups, edges, labels), groups


def build_flow_graph(edges: Sequence[FlowEdge], columns: Optional[Mapping[str, NodeId]] = None) -> Graph:
    """
    Undirected graph over the columns appearing in the flow, direction kept for export.

    Args:
        edges: Flow edges
        columns: Column label -> id; without it ids follow first appearance

    Raises:
        ScenarioError: an edge names a column outside columns
    """
    seen: List[str] = []
    for edge in edges:
        for label in (edge.source, edge.target):
            if columns is not None and label not in columns:
                raise ScenarioError(f"flow references unknown column {label!r}")
            if label not in seen:
                seen.append(label)
    ids = {label: columns[label] for label in seen} if columns is not None else assign_node_ids(seen)
    pairs = [(ids[edge.source], ids[edge.target]) for edge in edges]
    directed = [(ids[edge.source], ids[edge.target]) for edge in edges if edge.directed]
    return Graph(ids.values(), pairs, {node: label for label, node in ids.items()}, directed)


def build_column_graph(scenario: Scenario, extra_public: Iterable[str] = ()) -> Graph:
    """All columns, with explicit edges, supplier cliques and flow adjacency merged."""
    ids = scenario.column_ids()
    edges = {tuple(sorted((ids[u], ids[v]))) for u, v in scenario.edges}
    edges.update(build_full_supplier_graph(scenario.supplier_table(extra_public)).sorted_edges())
    flow = build_flow_graph(scenario.flow, ids)
    edges.update(flow.sorted_edges())
    return Graph(ids.values(), sorted(edges), {node: label for label, node in ids.items()}, flow.directed)


def assemble_stack(
    scenario: Scenario,
    supplier_mode: Optional[str] = None,
    equal_priority: Optional[bool] = None,
    extra_public: Iterable[str] = (),
) -> Tuple[Graph, AlgorithmStack]:
    """
    Build the column graph and the prioritized stack.

    Args:
        scenario: Parsed scenario
        supplier_mode: 'compacted' or 'full' overrides every supplier tier's substrate
        equal_priority: Override the scenario's shared-mode flag
        extra_public: Additional suppliers treated as public

    Returns:
        (column graph, stack)

    Raises:
        ScenarioError: empty stack or tiers that cannot be assembled
    """
    if not scenario.stack:
        raise ScenarioError("stack must contain at least one tier")
    if supplier_mode is not None and supplier_mode not in SUPPLIER_MODES:
        raise ScenarioError(f"unknown supplier mode {supplier_mode!r}")
    equal = scenario.equal_priority if equal_priority is None else equal_priority
    extra_public = tuple(extra_public)

    ids = scenario.column_ids()
    g = build_column_graph(scenario, extra_public)
    warn_if_disconnected(g, scenario.name)
    table = scenario.supplier_table(extra_public)

    entries = []
    for position, tier in enumerate(scenario.stack, start=1):
        algorithm = AlgorithmId(1 if equal else position, tier.kind, tier.label)
        substrate = tier.substrate or DEFAULT_SUBSTRATES[tier.kind]
        if substrate in (SUBSTRATE_COMPACTED, SUBSTRATE_SUPPLIERS) and supplier_mode is not None:
            substrate = SUBSTRATE_COMPACTED if supplier_mode == 'compacted' else SUBSTRATE_SUPPLIERS
        if equal and substrate == SUBSTRATE_COMPACTED:
            logger.info(f"{tier.label}: shared mode runs on the full supplier graph")
            substrate = SUBSTRATE_SUPPLIERS

        designation = None
        if tier.kind == Kind.BW and tier.list_name is not None:
            designation = {ids[column]: State(value) for column, value in scenario.lists[tier.list_name].items()}
        protocol = make_protocol(algorithm, designation)

        if substrate == SUBSTRATE_COLUMNS:
            entry = StackEntry(protocol)
        elif substrate == SUBSTRATE_SUPPLIERS:
            entry = StackEntry(protocol, build_full_supplier_graph(table))
        elif substrate == SUBSTRATE_COMPACTED:
            graph, projection = build_compacted_supplier_graph(table)
            entry = StackEntry(protocol, graph, projection)
        else:
            entry = StackEntry(protocol, build_flow_graph(scenario.flow, ids))

        tier_graph = entry.graph if entry.graph is not None else g
        if tier_graph.order == 0:
            logger.warning(f"{tier.label}: {substrate} substrate is empty")
        elif entry.graph is not None:
            warn_if_disconnected(tier_graph, f"{scenario.name}/{tier.label}")
        entries.append(entry)

    try:
        stack = AlgorithmStack(entries)
        stack.validate_against(g)
    except (StackError, GraphError) as e:
        raise ScenarioError(str(e)) from e
    logger.info(f"Assembled {stack!r} for {scenario.name} ({g.order} columns)")
    return g, stack


@dataclass
class RiskReport:
    """
    Per-column outcome of a run.

    admitted[tier] holds the columns a tier lets through: those it reports
    in, plus columns outside its substrate.
    """

    scenario: str
    columns: List[str]
    states: Dict[str, Dict[str, str]]
    admitted: Dict[str, List[str]]
    intersection: List[str]
    first_excluding: Dict[str, Optional[str]]
    bounds: BoundReport
    stabilized: bool
    violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            'scenario': self.scenario,
            'stabilized': self.stabilized,
            'columns': self.columns,
            'states': self.states,
            'admitted': self.admitted,
            'intersection': self.intersection,
            'first_excluding': self.first_excluding,
            'bounds': self.bounds.to_dict(),
            'violations': self.violations,
            'warnings': self.warnings,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def risk_report(
    g: Graph,
    stack: AlgorithmStack,
    final: Configuration,
    trace: Trace,
    scenario_name: str = 'scenario',
) -> RiskReport:
    """
    Tabulate a finished run per column.

    Computes each tier's column view, the columns every tier admits, the
    first (lowest-priority-value) tier excluding each column, bound
    checks, invariant checks on stabilized runs, and warnings for each
    tier left with an empty in-set on its induced subgraph and for each
    bound exceeded.
    """
    columns = g.sorted_nodes()
    states: Dict[str, Dict[str, str]] = {}
    admitted: Dict[str, List[str]] = {}
    first_excluding: Dict[str, Optional[str]] = {g.label(column): None for column in columns}
    admitted_sets = []

    for entry in stack.entries:
        label = entry.algorithm.label
        view = column_view(g, stack, final, entry.algorithm)
        states[label] = {g.label(column): view[column].value for column in columns if column in view}
        let_through = frozenset(column for column in columns if column not in view or view[column] == State.IN)
        admitted[label] = g.labels_of(let_through)
        admitted_sets.append(let_through)
        for column in columns:
            if column in view and is_out(view[column]) and first_excluding[g.label(column)] is None:
                first_excluding[g.label(column)] = label

    intersection = frozenset(columns).intersection(*admitted_sets) if admitted_sets else frozenset(columns)
    stabilized = is_stable(g, stack, final)

    warnings = []
    for entry in stack.entries:
        members = stack.in_set(final, entry.algorithm) & stack.tier_graph(entry, g).nodes
        if not members:
            message = f"{entry.algorithm}: unresolved dimension, empty in-set on its induced subgraph"
            logger.warning(message)
            warnings.append(message)
    if not stabilized:
        warnings.append("run did not stabilize")

    bounds = bound_report(g, stack, final, trace)
    for tier in bounds.tiers:
        if not tier.passed:
            warnings.append(
                f"{tier.label}: {tier.moves_after_lower} moves after lower tiers stabilized exceed bound {tier.bound}"
            )
    if not bounds.combined_passed:
        warnings.append(f"{bounds.total_moves} moves exceed the combined bound {bounds.combined_bound}")

    violations = check_stable_invariants(g, stack, final) if stabilized else []
    report = RiskReport(
        scenario=scenario_name,
        columns=g.labels_of(columns),
        states=states,
        admitted=admitted,
        intersection=g.labels_of(intersection),
        first_excluding=first_excluding,
        bounds=bounds,
        stabilized=stabilized,
        violations=violations,
        warnings=warnings,
    )
    logger.info(f"{scenario_name}: intersection {format_labels(report.intersection)}")
    return report


def tier_dots(g: Graph, stack: AlgorithmStack, final: Optional[Configuration] = None) -> Dict[str, str]:
    """DOT text per tier, nodes colored by final state when given."""
    dots = {}
    for entry in stack.entries:
        graph = stack.tier_graph(entry, g)
        states = None
        if final is not None:
            values = final.values_of(stack.slot(entry.algorithm))
            states = {node: values[node].value for node in graph.nodes}
        dots[entry.algorithm.label] = to_dot(graph, states, name=entry.algorithm.label)
    return dots


def _locate(text: str, loc: Sequence[Union[str, int]]) -> Optional[int]:
    """Line of the YAML node at a pydantic error location."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for part in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            child = None
            for key, value in node.value:
                if key.value == str(part):
                    line = key.start_mark.line + 1
                    child = value
                    break
            node = child
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


def parse_scenario(text: str) -> Scenario:
    """
    Parse scenario YAML.

    Raises:
        ScenarioError: malformed YAML or invalid content, with its line when known
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ScenarioError(f"malformed YAML: {getattr(e, 'problem', e)}", mark.line + 1 if mark else None) from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping", 1)
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = '.'.join(str(part) for part in first['loc'])
        raise ScenarioError(f"{where}: {first['msg']}", _locate(text, first['loc'])) from None


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.model_dump(mode='json', by_alias=True), sort_keys=False)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    scenario = parse_scenario(text)
    logger.info(f"Loaded scenario {scenario.name} from {path}")
    return scenario


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_scenario(scenario), encoding='utf-8')
    return path


# Built-in scenarios

HALL_SUPPLIER_ROWS = {
    'A': ['X'],
    'B': ['X', 'Y'],
    'C': ['Y'],
    'D': ['Y', 'Z'],
    'E': ['Z'],
    'F': ['X', 'Z'],
}

CONTENTION_FLOW = [('E', 'A'), ('F', 'A'), ('A', 'C'), ('B', 'C'), ('D', 'C')]

MULTI_LIST_EDGES = [('A', 'B'), ('B', 'C'), ('C', 'D'), ('D', 'E'), ('E', 'A')]

MULTI_LISTS = {
    'BW1': {'A': 'in', 'B': 'in', 'C': 'out', 'D': 'out', 'E': 'in'},
    'BW2': {'A': 'in', 'B': 'in', 'C': 'in', 'D': 'out', 'E': 'out'},
}


def hall_supplier_table() -> SupplierTable:
    """Six columns A-F shared by suppliers X, Y and Z."""
    return SupplierTable.from_rows(HALL_SUPPLIER_ROWS)


def contention_flow_edges() -> List[FlowEdge]:
    """Parts flow E, F -> A -> C <- B, D with C the final assembly point."""
    return [FlowEdge(source=u, target=v) for u, v in CONTENTION_FLOW]


def multi_list_scenario() -> Scenario:
    return Scenario(
        name='multi-list',
        columns=[Column(label=label) for label in 'ABCDE'],
        lists=MULTI_LISTS,
        edges=MULTI_LIST_EDGES,
        stack=[
            Tier(kind=Kind.BW, label='BW1', list_name='BW1'),
            Tier(kind=Kind.BW, label='BW2', list_name='BW2'),
        ],
    )


def contention_scenario(equal_priority: bool = False) -> Scenario:
    """Supplier MIS against parts-flow MDS over the same six columns."""
    return Scenario(
        name='contention-equal' if equal_priority else 'contention',
        columns=[Column(label=label) for label in HALL_SUPPLIER_ROWS],
        suppliers=HALL_SUPPLIER_ROWS,
        flow=contention_flow_edges(),
        stack=[
            Tier(kind=Kind.MIS, label='MIS'),
            Tier(kind=Kind.MDS, label='MDS'),
        ],
        equal_priority=equal_priority,
    )


def three_tier_scenario() -> Scenario:
    """Blacklist, supplier MIS and parts-flow MDS in that priority order."""
    return Scenario(
        name='three-tier',
        columns=[Column(label=label) for label in HALL_SUPPLIER_ROWS],
        lists={'BW': {'D': 'out'}},
        suppliers=HALL_SUPPLIER_ROWS,
        flow=contention_flow_edges(),
        stack=[
            Tier(kind=Kind.BW, label='BW', list_name='BW'),
            Tier(kind=Kind.MIS, label='MIS'),
            Tier(kind=Kind.MDS, label='MDS'),
        ],
    )


BUILTIN_SCENARIOS = {
    'multi-list': multi_list_scenario,
    'contention': contention_scenario,
    'contention-equal': lambda: contention_scenario(equal_priority=True),
    'three-tier': three_tier_scenario,
}


def resolve_scenario(name_or_path: Union[str, Path]) -> Scenario:
    """A built-in scenario by name, otherwise a scenario file."""
    if str(name_or_path) in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[str(name_or_path)]()
    return load_scenario(name_or_path)


@dataclass
class NonconvergenceVerdict:
    """Three-part outcome of the equal-priority contention demonstration."""

    feasibility: Dict[str, FeasibilityVerdict]
    column_feasibility: Optional[FeasibilityVerdict]
    equal_priority: Optional[RunResult]
    hierarchical: RunResult
    public_suppliers: List[str] = field(default_factory=list)

    @property
    def infeasible(self) -> bool:
        return all(not verdict.feasible for verdict in self.feasibility.values())

    def summary(self) -> str:
        parts = []
        if self.feasibility:
            parts.append('infeasible' if self.infeasible else 'feasible')
        if self.equal_priority is not None:
            if self.equal_priority.livelock:
                parts.append('livelock detected')
            elif self.equal_priority.stabilized:
                parts.append('equal-priority stabilized')
            else:
                parts.append('budget exhausted')
        parts.append('hierarchical stabilized' if self.hierarchical.stabilized else 'hierarchical did not stabilize')
        return ' / '.join(parts)


def nonconvergence_demo(
    public_suppliers: Iterable[str] = (),
    hierarchical_only: bool = False,
    max_moves: int = 10 ** 6,
    seed: int = 0,
) -> NonconvergenceVerdict:
    """
    Show that the supplier MIS and the parts-flow MDS cannot be solved
    together at equal priority, and that prioritizing them converges.

    Runs the joint feasibility search under both projection conventions,
    the shared-variable run under a deterministic daemon with revisit
    detection, and the hierarchical run.
    """
    public = list(public_suppliers)
    scenario = contention_scenario()
    table = scenario.supplier_table(public)
    ids = scenario.column_ids()
    flow = build_flow_graph(scenario.flow, ids)

    feasibility: Dict[str, FeasibilityVerdict] = {}
    column_feasibility = None
    equal_result = None
    if not hierarchical_only:
        compacted, projection = build_compacted_supplier_graph(table)
        for convention in ('any', 'all'):
            feasibility[convention] = joint_feasibility(compacted, flow, flow.nodes, projection, convention)
        column_feasibility = joint_feasibility(build_full_supplier_graph(table), flow, flow.nodes)

        g, stack = assemble_stack(scenario, equal_priority=True, extra_public=public)
        policy = SchedulerPolicy(SchedulerKind.CENTRAL_ADVERSARIAL_MIN_ID, seed)
        equal_result = run_to_stabilization(
            g, stack, all_out_configuration(g, stack), policy, max_moves=max_moves, detect_revisits=True,
        )

    g, stack = assemble_stack(scenario, extra_public=public)
    hierarchical = run_to_stabilization(
        g, stack, all_out_configuration(g, stack), SchedulerPolicy(SchedulerKind.DISTRIBUTED_RANDOM_SUBSET, seed),
    )
    verdict = NonconvergenceVerdict(feasibility, column_feasibility, equal_result, hierarchical, public)
    logger.info(f"Non-convergence demo: {verdict.summary()}")
    return verdict
