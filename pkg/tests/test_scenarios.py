"""
Unit tests for scenario parsing, graph builders, stacks and risk reports.
"""

import logging

import pytest
import yaml

from oracles import is_maximal_independent
from protocols import Kind
from scenarios import (
    BUILTIN_SCENARIOS,
    FlowEdge,
    ScenarioError,
    SupplierTable,
    assemble_stack,
    build_compacted_supplier_graph,
    build_flow_graph,
    build_full_supplier_graph,
    dump_scenario,
    load_scenario,
    nonconvergence_demo,
    parse_scenario,
    resolve_scenario,
    risk_report,
    save_scenario,
    tier_dots,
)
from stabilization_engine import (
    SchedulerKind,
    SchedulerPolicy,
    all_out_configuration,
    random_configuration,
    run_to_stabilization,
)


def edge_labels(g):
    return sorted(tuple(g.labels_of(edge)) for edge in g.edges)


class TestSupplierGraphs:
    """Test suite for the supplier graph builders."""

    def test_hall_suppliers_full(self, hall_suppliers):
        g = build_full_supplier_graph(hall_suppliers)
        assert edge_labels(g) == [
            ('A', 'B'), ('A', 'F'), ('B', 'C'), ('B', 'D'), ('B', 'F'),
            ('C', 'D'), ('D', 'E'), ('D', 'F'), ('E', 'F'),
        ]

    def test_single_supplier_column(self):
        g = build_full_supplier_graph(SupplierTable.from_rows({'A': ['X']}))
        assert g.order == 1
        assert g.size == 0

    def test_two_shared_suppliers_one_edge(self):
        g = build_full_supplier_graph(SupplierTable.from_rows({'A': ['X', 'Y'], 'B': ['X', 'Y']}))
        assert edge_labels(g) == [('A', 'B')]

    def test_hall_suppliers_compacted_triangle(self, hall_suppliers):
        g, projection = build_compacted_supplier_graph(hall_suppliers)
        assert sorted(g.labels.values()) == ['ABF', 'BCD', 'DEF']
        assert g.size == 3
        columns = {g.label(group): sorted(column_labels(hall_suppliers, projection[group])) for group in g.nodes}
        assert columns == {'ABF': ['A', 'B', 'F'], 'BCD': ['B', 'C', 'D'], 'DEF': ['D', 'E', 'F']}

    def test_groups_adjacent_iff_sharing_columns(self, hall_suppliers):
        g, projection = build_compacted_supplier_graph(hall_suppliers)
        for u in g.nodes:
            for v in g.nodes - {u}:
                assert (v in g.neighbors(u)) == bool(projection[u] & projection[v])

    def test_public_supplier_isolated(self, hall_suppliers):
        g, _ = build_compacted_supplier_graph(hall_suppliers.with_public(['Y']))
        bcd = g.node_id('BCD')
        assert g.neighbors(bcd) == frozenset()
        assert g.neighbors(g.node_id('ABF')) == {g.node_id('DEF')}

    def test_public_supplier_drops_clique(self, hall_suppliers):
        g = build_full_supplier_graph(hall_suppliers.with_public(['Y']))
        assert ('C', 'D') not in edge_labels(g)
        assert ('B', 'C') not in edge_labels(g)

    def test_disjoint_suppliers(self):
        """Unshared suppliers give an edgeless group graph whose MIS is everything."""
        table = SupplierTable.from_rows({'A': ['X'], 'B': ['Y'], 'C': ['Z']})
        g, _ = build_compacted_supplier_graph(table)
        assert g.size == 0
        assert is_maximal_independent(g, g.nodes)


class TestFlowGraph:
    """Test suite for build_flow_graph."""

    def test_linear(self):
        g = build_flow_graph([FlowEdge(source='A', target='B'), FlowEdge(source='B', target='C')])
        assert edge_labels(g) == [('A', 'B'), ('B', 'C')]
        assert len(g.directed) == 2

    def test_empty(self):
        assert build_flow_graph([]).order == 0

    def test_unknown_column(self, hall_suppliers):
        with pytest.raises(ScenarioError):
            build_flow_graph([FlowEdge(source='A', target='Q')], hall_suppliers.columns)

    def test_contention_flow(self, contention):
        scenario, _, _ = contention
        g = build_flow_graph(scenario.flow, scenario.column_ids())
        assert g.order == 6
        assert sorted(g.labels_of(g.neighbors(g.node_id('C')))) == ['A', 'B', 'D']


def column_labels(table, columns):
    labels = {node: label for label, node in table.columns.items()}
    return [labels[column] for column in columns]


class TestAssembleStack:
    """Test suite for assemble_stack."""

    def test_multi_list(self, multi_list):
        _, g, stack = multi_list
        assert g.order == 5
        assert [a.priority for a in stack.algorithms] == [1, 2]
        assert stack.kinds == [Kind.BW, Kind.BW]
        assert not stack.shared

    def test_three_tier_substrates(self, three_tier):
        _, g, stack = three_tier
        assert [a.priority for a in stack.algorithms] == [1, 2, 3]
        assert stack.by_label('BW').graph is None
        assert stack.by_label('MIS').projection is not None
        assert stack.by_label('MDS').graph.order == 6

    def test_full_supplier_override(self, three_tier):
        scenario, _, _ = three_tier
        _, stack = assemble_stack(scenario, supplier_mode='full')
        mis = stack.by_label('MIS')
        assert mis.projection is None
        assert mis.graph.order == 6

    def test_equal_priority(self, contention_equal):
        _, _, stack = contention_equal
        assert stack.shared
        assert stack.by_label('MIS').graph.order == 6

    def test_empty_stack(self):
        scenario = parse_scenario("columns: [A]\n")
        with pytest.raises(ScenarioError):
            assemble_stack(scenario)

    def test_bad_supplier_mode(self, three_tier):
        scenario, _, _ = three_tier
        with pytest.raises(ScenarioError):
            assemble_stack(scenario, supplier_mode='sideways')

    def test_empty_tier_warns(self, caplog):
        scenario = parse_scenario("columns: [A, B]\nstack:\n  - {kind: MDS, label: MDS}\n")
        g, stack = assemble_stack(scenario)
        assert stack.by_label('MDS').graph.order == 0
        assert 'empty' in caplog.text


class TestScenarioFiles:
    """Test suite for scenario parsing and serialization."""

    @pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
    def test_round_trip(self, name):
        scenario = BUILTIN_SCENARIOS[name]()
        assert parse_scenario(dump_scenario(scenario)).model_dump() == scenario.model_dump()

    @pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
    def test_shipped_files_match_builtins(self, scenarios_dir, name):
        path = scenarios_dir / f"{name.replace('-', '_')}.yaml"
        assert load_scenario(path).model_dump() == BUILTIN_SCENARIOS[name]().model_dump()

    def test_save_and_load(self, tmp_path, three_tier):
        scenario, _, _ = three_tier
        path = save_scenario(scenario, tmp_path / 'saved' / 'three.yaml')
        assert load_scenario(path).model_dump() == scenario.model_dump()

    def test_error_line(self, test_data_dir):
        with pytest.raises(ScenarioError) as excinfo:
            load_scenario(test_data_dir / 'bad_scenario.yaml')
        assert 'Q' in str(excinfo.value)
        assert excinfo.value.line in (3, 4)

    def test_malformed_yaml_line(self):
        with pytest.raises(ScenarioError) as excinfo:
            parse_scenario("columns: [A, B\nstack: []\n")
        assert excinfo.value.line is not None

    def test_unknown_list(self):
        with pytest.raises(ScenarioError) as excinfo:
            parse_scenario("columns: [A]\nstack:\n  - {kind: BW, label: BW, list: missing}\n")
        assert 'missing' in str(excinfo.value)

    def test_unknown_field(self):
        with pytest.raises(ScenarioError):
            parse_scenario("columns: [A]\ncolour: red\n")

    def test_not_a_mapping(self):
        with pytest.raises(ScenarioError):
            parse_scenario("- A\n- B\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / 'nope.yaml')

    def test_resolve(self, test_data_dir):
        assert resolve_scenario('three-tier').name == 'three-tier'
        with pytest.raises(ScenarioError):
            resolve_scenario(test_data_dir / 'bad_scenario.yaml')

    def test_public_suppliers_must_exist(self):
        with pytest.raises(ScenarioError):
            parse_scenario("columns: [A]\nsuppliers: {A: [X]}\npublic_suppliers: [W]\n")


class TestRiskReport:
    """Test suite for risk_report."""

    def test_multi_list_intersection(self, multi_list):
        scenario, g, stack = multi_list
        result = run_to_stabilization(g, stack, random_configuration(g, stack, 1), SchedulerPolicy(seed=1))
        report = risk_report(g, stack, result.final, result.trace, scenario.name)
        assert report.intersection == ['A', 'B']
        assert report.admitted['BW1'] == ['A', 'B', 'E']
        assert report.first_excluding['C'] == 'BW1'
        assert report.first_excluding['E'] == 'BW2'
        assert report.first_excluding['A'] is None
        assert report.violations == []

    def test_single_whitelist_admits_all(self):
        scenario = parse_scenario(
            "columns: [A, B, C]\nlists: {W: {A: in, B: in, C: in}}\nstack:\n  - {kind: BW, label: W, list: W}\n"
        )
        g, stack = assemble_stack(scenario)
        result = run_to_stabilization(g, stack, all_out_configuration(g, stack), SchedulerPolicy())
        report = risk_report(g, stack, result.final, result.trace)
        assert report.intersection == ['A', 'B', 'C']

    def test_three_tier(self, three_tier):
        scenario, g, stack = three_tier
        result = run_to_stabilization(g, stack, random_configuration(g, stack, 2), SchedulerPolicy(seed=2))
        report = risk_report(g, stack, result.final, result.trace, scenario.name)
        assert report.stabilized
        assert report.violations == []
        assert report.bounds.combined_passed
        for tier in report.bounds.tiers:
            assert tier.kind == Kind.MIS or tier.checked_moves <= tier.bound
            flagged = [w for w in report.warnings if w.startswith(f"{tier.label}: ") and 'exceed bound' in w]
            assert bool(flagged) == (not tier.passed)
        assert 'D' not in report.intersection
        assert report.first_excluding['D'] == 'BW'

    def test_yaml(self, multi_list):
        _, g, stack = multi_list
        result = run_to_stabilization(g, stack, all_out_configuration(g, stack), SchedulerPolicy())
        data = yaml.safe_load(risk_report(g, stack, result.final, result.trace).to_yaml())
        assert data['intersection'] == ['A', 'B']
        assert data['bounds']['passed'] is True

    def test_empty_tiers_warn(self, caplog):
        """A blacklist covering every column leaves each tier with nothing in."""
        scenario = parse_scenario(
            "columns: [A, B, C]\n"
            "lists: {W: {A: out, B: out, C: out}}\n"
            "edges: [[A, B], [B, C]]\n"
            "stack:\n"
            "  - {kind: BW, label: W, list: W}\n"
            "  - {kind: MIS, label: M, substrate: columns}\n"
            "  - {kind: MDS, label: D, substrate: columns}\n"
        )
        g, stack = assemble_stack(scenario)
        result = run_to_stabilization(g, stack, random_configuration(g, stack, 1), SchedulerPolicy(seed=1))
        with caplog.at_level(logging.WARNING, logger='scenarios'):
            report = risk_report(g, stack, result.final, result.trace)
        assert report.stabilized
        assert report.intersection == []
        for label in ('W', 'M', 'D'):
            message = f"{label}: unresolved dimension, empty in-set on its induced subgraph"
            assert message in report.warnings
            assert message in caplog.text

    def test_no_empty_tier_warning(self, multi_list):
        _, g, stack = multi_list
        result = run_to_stabilization(g, stack, all_out_configuration(g, stack), SchedulerPolicy())
        report = risk_report(g, stack, result.final, result.trace)
        assert not any('unresolved dimension' in warning for warning in report.warnings)

    def test_unstable_run_warns(self, contention_equal):
        _, g, stack = contention_equal
        result = run_to_stabilization(
            g, stack, all_out_configuration(g, stack), SchedulerPolicy(SchedulerKind.CENTRAL_RANDOM), max_moves=20,
        )
        report = risk_report(g, stack, result.final, result.trace)
        assert not report.stabilized
        assert 'run did not stabilize' in report.warnings

    def test_tier_dots(self, three_tier):
        _, g, stack = three_tier
        result = run_to_stabilization(g, stack, all_out_configuration(g, stack), SchedulerPolicy())
        dots = tier_dots(g, stack, result.final)
        assert set(dots) == {'BW', 'MIS', 'MDS'}
        assert 'ABF' in dots['MIS']
        assert 'fillcolor=palegreen' in dots['MIS']


class TestNonconvergence:
    """Test suite for the contention demonstration."""

    def test_verdict(self):
        verdict = nonconvergence_demo()
        assert verdict.infeasible
        assert verdict.column_feasibility.feasible
        assert verdict.equal_priority.livelock
        assert verdict.hierarchical.stabilized
        assert verdict.summary() == 'infeasible / livelock detected / hierarchical stabilized'

    def test_hierarchical_only(self):
        verdict = nonconvergence_demo(hierarchical_only=True)
        assert verdict.equal_priority is None
        assert verdict.summary() == 'hierarchical stabilized'

    def test_public_supplier(self):
        verdict = nonconvergence_demo(public_suppliers=['Y'])
        assert verdict.feasibility['any'].feasible
        assert verdict.summary().startswith('feasible')
