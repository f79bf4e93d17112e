"""
Immutable undirected graphs with neighborhood queries, induced subgraphs
and node identity.
"""

import logging
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

logger = logging.getLogger(__name__)

NodeId = int
NodeSet = FrozenSet[NodeId]
Edge = FrozenSet[NodeId]

STATE_COLORS = {
    'in': 'palegreen',
    'wait': 'khaki',
    'out': 'lightcoral',
    'out1': 'lightsalmon',
    'out2': 'indianred',
}


class GraphError(ValueError):
    """Invalid graph construction or query."""


class UnknownNodeError(GraphError, KeyError):
    """A node id or label that the graph does not contain."""

    def __init__(self, node: Union[NodeId, str]):
        self.node = node
        super().__init__(f"unknown node: {node!r}")

    def __str__(self) -> str:
        return f"unknown node: {self.node!r}"


class GraphParseError(GraphError):
    """Malformed graph text, with the offending line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class Graph:
    """
    Undirected simple graph over positive integer node ids.

    Edges may carry a direction flag for display purposes; every
    adjacency query ignores it.
    """

    __slots__ = ('_nodes', '_edges', '_labels', '_directed', '_adjacency')

    def __init__(
        self,
        nodes: Iterable[NodeId],
        edges: Iterable[Sequence[NodeId]] = (),
        labels: Optional[Mapping[NodeId, str]] = None,
        directed: Iterable[Tuple[NodeId, NodeId]] = (),
    ):
        node_set = frozenset(nodes)
        for node in node_set:
            if not isinstance(node, int) or isinstance(node, bool) or node < 1:
                raise GraphError(f"node ids must be positive integers, got {node!r}")

        adjacency: Dict[NodeId, set] = {node: set() for node in node_set}
        edge_set = set()
        for edge in edges:
            u, v = edge
            if u not in node_set:
                raise UnknownNodeError(u)
            if v not in node_set:
                raise UnknownNodeError(v)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            edge_set.add(frozenset((u, v)))
            adjacency[u].add(v)
            adjacency[v].add(u)

        directed_set = frozenset((u, v) for u, v in directed)
        for u, v in directed_set:
            if frozenset((u, v)) not in edge_set:
                raise GraphError(f"directed flag on missing edge {u}->{v}")

        label_map = dict(labels or {})
        for node in label_map:
            if node not in node_set:
                raise UnknownNodeError(node)

        self._nodes = node_set
        self._edges = frozenset(edge_set)
        self._labels = label_map
        self._directed = directed_set
        self._adjacency = {node: frozenset(nbrs) for node, nbrs in adjacency.items()}

    @property
    def nodes(self) -> NodeSet:
        return self._nodes

    @property
    def edges(self) -> FrozenSet[Edge]:
        return self._edges

    @property
    def labels(self) -> Dict[NodeId, str]:
        return dict(self._labels)

    @property
    def directed(self) -> FrozenSet[Tuple[NodeId, NodeId]]:
        return self._directed

    @property
    def order(self) -> int:
        """n = |V|."""
        return len(self._nodes)

    @property
    def size(self) -> int:
        """m = |E|."""
        return len(self._edges)

    def has_node(self, node: NodeId) -> bool:
        return node in self._nodes

    def neighbors(self, node: NodeId) -> NodeSet:
        try:
            return self._adjacency[node]
        except KeyError:
            raise UnknownNodeError(node) from None

    def label(self, node: NodeId) -> str:
        if node not in self._nodes:
            raise UnknownNodeError(node)
        return self._labels.get(node, str(node))

    def node_id(self, label: str) -> NodeId:
        for node, text in self._labels.items():
            if text == label:
                return node
        if label.isdigit() and int(label) in self._nodes and int(label) not in self._labels:
            return int(label)
        raise UnknownNodeError(label)

    def sorted_nodes(self) -> List[NodeId]:
        return sorted(self._nodes)

    def sorted_edges(self) -> List[Tuple[NodeId, NodeId]]:
        return sorted(tuple(sorted(edge)) for edge in self._edges)

    def labels_of(self, nodes: Iterable[NodeId]) -> List[str]:
        return [self.label(node) for node in sorted(nodes)]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self._nodes)
        graph.add_edges_from(tuple(edge) for edge in self._edges)
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._edges == other._edges
            and self._labels == other._labels
        )

    def __hash__(self) -> int:
        return hash((self._nodes, self._edges, frozenset(self._labels.items())))

    def __repr__(self) -> str:
        return f"Graph(n={self.order}, m={self.size})"


def open_neighborhood(g: Graph, i: NodeId) -> NodeSet:
    """N(i): the neighbors of i, excluding i."""
    return g.neighbors(i)


def closed_neighborhood(g: Graph, i: NodeId) -> NodeSet:
    """N[i] = N(i) ∪ {i}."""
    return g.neighbors(i) | {i}


def induced_subgraph(g: Graph, keep: Iterable[NodeId]) -> Graph:
    """
    Restrict g to a node subset and the edges among it.

    Args:
        g: Source graph
        keep: Nodes to keep; every id must belong to g

    Returns:
        The induced subgraph, labels and direction flags preserved
    """
    keep_set = frozenset(keep)
    for node in keep_set:
        if node not in g.nodes:
            raise UnknownNodeError(node)
    edges = [tuple(edge) for edge in g.edges if edge <= keep_set]
    labels = {node: text for node, text in g.labels.items() if node in keep_set}
    directed = [(u, v) for u, v in g.directed if u in keep_set and v in keep_set]
    return Graph(keep_set, edges, labels, directed)


def is_connected(g: Graph) -> bool:
    """True iff g has one connected component; the empty graph counts as connected."""
    if g.order == 0:
        return True
    return nx.is_connected(g.to_networkx())


def warn_if_disconnected(g: Graph, context: str) -> bool:
    """Log a warning for disconnected input; returns the connectivity verdict."""
    connected = is_connected(g)
    if not connected:
        components = nx.number_connected_components(g.to_networkx())
        logger.warning(f"{context}: graph is disconnected ({components} components); continuing")
    return connected


def assign_node_ids(labels: Sequence[str], explicit: Optional[Mapping[str, int]] = None) -> Dict[str, NodeId]:
    """
    Assign node ids to labels.

    Explicit ids are kept; the remaining labels get the smallest unused
    ids in first-seen order.

    Args:
        labels: Labels in input order (duplicates ignored after first)
        explicit: Label to id overrides

    Returns:
        Mapping label -> id
    """
    explicit = dict(explicit or {})
    used = set()
    for label, node in explicit.items():
        if node in used:
            raise GraphError(f"duplicate explicit id {node} (label {label!r})")
        if not isinstance(node, int) or node < 1:
            raise GraphError(f"explicit id for {label!r} must be a positive integer")
        used.add(node)

    assigned: Dict[str, NodeId] = {}
    candidate = 1
    for label in labels:
        if label in assigned:
            continue
        if label in explicit:
            assigned[label] = explicit[label]
            continue
        while candidate in used:
            candidate += 1
        assigned[label] = candidate
        used.add(candidate)
    for label, node in explicit.items():
        assigned.setdefault(label, node)
    return assigned


def graph_from_labels(
    labels: Sequence[str],
    edges: Iterable[Tuple[str, str]] = (),
    explicit_ids: Optional[Mapping[str, int]] = None,
    directed: Iterable[Tuple[str, str]] = (),
) -> Graph:
    """Build a graph from labeled nodes and labeled edges."""
    ids = assign_node_ids(labels, explicit_ids)
    edge_list = []
    for u, v in edges:
        if u not in ids:
            raise UnknownNodeError(u)
        if v not in ids:
            raise UnknownNodeError(v)
        edge_list.append((ids[u], ids[v]))
    directed_list = [(ids[u], ids[v]) for u, v in directed]
    return Graph(ids.values(), edge_list, {node: label for label, node in ids.items()}, directed_list)


def graph_from_networkx(graph: nx.Graph) -> Graph:
    """Relabel a networkx graph onto ids 1..n in sorted node order; labels keep the original names."""
    ids = {node: index for index, node in enumerate(sorted(graph.nodes), start=1)}
    return Graph(
        ids.values(),
        [(ids[u], ids[v]) for u, v in graph.edges if u != v],
        {index: str(node) for node, index in ids.items()},
    )


def parse_graph_text(text: str) -> Graph:
    """
    Parse the line-oriented graph format.

    Lines are ``node LABEL [ID]`` or ``edge A B [directed]``; blank lines
    and ``#`` comments are ignored. Edge endpoints not declared as nodes
    are added in first-seen order; a later node line may still give such
    an endpoint its id.
    """
    labels: List[str] = []
    explicit: Dict[str, int] = {}
    declared = set()
    edges: List[Tuple[str, str]] = []
    directed: List[Tuple[str, str]] = []
    seen_edges = set()

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        keyword = parts[0].lower()
        if keyword == 'node':
            if len(parts) not in (2, 3):
                raise GraphParseError("expected 'node LABEL [ID]'", number)
            label = parts[1]
            if label in declared:
                raise GraphParseError(f"node {label!r} declared twice", number)
            declared.add(label)
            if len(parts) == 3:
                try:
                    explicit[label] = int(parts[2])
                except ValueError:
                    raise GraphParseError(f"node id must be an integer, got {parts[2]!r}", number) from None
            if label not in labels:
                labels.append(label)
        elif keyword == 'edge':
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3].lower() != 'directed'):
                raise GraphParseError("expected 'edge A B [directed]'", number)
            u, v = parts[1], parts[2]
            if u == v:
                raise GraphParseError(f"self-loop on {u!r}", number)
            for label in (u, v):
                if label not in labels:
                    labels.append(label)
            key = frozenset((u, v))
            if key not in seen_edges:
                seen_edges.add(key)
                edges.append((u, v))
            if len(parts) == 4:
                directed.append((u, v))
        else:
            raise GraphParseError(f"unknown keyword {parts[0]!r}", number)

    try:
        return graph_from_labels(labels, edges, explicit, directed)
    except GraphError as e:
        raise GraphParseError(str(e)) from e


def read_graph(path: Union[str, Path]) -> Graph:
    """Read a graph file in the line-oriented format."""
    return parse_graph_text(Path(path).read_text(encoding='utf-8'))


def dot_escape(text: str) -> str:
    """Escape backslashes and double quotes for a quoted DOT string."""
    return str(text).replace('\\', '\\\\').replace('"', '\\"')


def to_dot(g: Graph, states: Optional[Mapping[NodeId, str]] = None, name: str = 'G') -> str:
    """
    Serialize g as DOT text.

    Args:
        g: Graph to export
        states: Optional protocol state per node, used for fill colors
        name: Graph name

    Returns:
        DOT source
    """
    lines = [f'graph "{dot_escape(name)}" {{', '  node [style=filled, fillcolor=white];']
    for node in g.sorted_nodes():
        attrs = [f'label="{dot_escape(g.label(node))}"']
        if states is not None and node in states:
            state = str(states[node])
            attrs[0] = f'label="{dot_escape(g.label(node))}\\n{dot_escape(state)}"'
            attrs.append(f'fillcolor={STATE_COLORS.get(state, "white")}')
        lines.append(f'  n{node} [{", ".join(attrs)}];')
    for u, v in g.sorted_edges():
        if (u, v) in g.directed:
            lines.append(f'  n{u} -- n{v} [dir=forward];')
        elif (v, u) in g.directed:
            lines.append(f'  n{v} -- n{u} [dir=forward];')
        else:
            lines.append(f'  n{u} -- n{v};')
    lines.append('}')
    return '\n'.join(lines) + '\n'
