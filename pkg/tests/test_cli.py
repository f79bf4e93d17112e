"""
Tests for the command-line interface.
"""

import json

import networkx as nx
import pytest
import yaml
from click.testing import CliRunner

from cli import EXIT_INPUT_ERROR, EXIT_NOT_STABILIZED, EXIT_STABILIZED, cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def path17(tmp_path):
    """Graph file too large for the enumeration cap."""
    path = tmp_path / 'path17.txt'
    path.write_text(''.join(f"edge {u + 1} {v + 1}\n" for u, v in nx.path_graph(17).edges), encoding='utf-8')
    return path


class TestRun:
    """Test suite for the run command."""

    def test_multi_list(self, runner, out_dir):
        result = runner.invoke(cli, ['run', '--scenario', 'multi-list', '--seed', '3', '--out-dir', str(out_dir)])
        assert result.exit_code == EXIT_STABILIZED, result.output
        assert 'Intersection: {A, B}' in result.output
        run_dir = out_dir / 'multi-list' / 'seed-3'
        for name in ('risk_report.yaml', 'bounds.yaml', 'trace.jsonl', 'BW1.dot', 'BW2.dot'):
            assert (run_dir / name).exists()
        report = yaml.safe_load((run_dir / 'risk_report.yaml').read_text())
        assert report['intersection'] == ['A', 'B']

    def test_reproducible_artifacts(self, runner, tmp_path):
        outputs = []
        for name in ('first', 'second'):
            target = tmp_path / name
            result = runner.invoke(cli, ['run', '--scenario', 'three-tier', '--seed', '11', '--out-dir', str(target)])
            assert result.exit_code == EXIT_STABILIZED, result.output
            run_dir = target / 'three-tier' / 'seed-11'
            outputs.append(((run_dir / 'trace.jsonl').read_text(), (run_dir / 'risk_report.yaml').read_text()))
        assert outputs[0] == outputs[1]

    def test_trace_lines(self, runner, out_dir):
        result = runner.invoke(cli, ['run', '--scenario', 'three-tier', '--seed', '1', '--out-dir', str(out_dir)])
        assert result.exit_code == EXIT_STABILIZED
        lines = (out_dir / 'three-tier' / 'seed-1' / 'trace.jsonl').read_text().splitlines()
        assert all(json.loads(line)['algorithm'] in ('BW', 'MIS', 'MDS') for line in lines)

    def test_equal_priority_livelock(self, runner, out_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', 'contention-equal', '--scheduler', 'central-adversarial-min-id',
            '--init', 'all-out', '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_NOT_STABILIZED
        assert 'livelock detected' in result.output

    def test_budget_exhausted(self, runner, out_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', 'contention', '--equal-priority', '--max-moves', '25', '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_NOT_STABILIZED
        assert 'budget' in result.output

    def test_adversarial_file(self, runner, out_dir, test_data_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', 'multi-list', '--init', 'adversarial-from-file',
            '--init-file', str(test_data_dir / 'adversarial.yaml'), '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_STABILIZED, result.output
        assert 'Intersection: {A, B}' in result.output

    def test_adversarial_without_file(self, runner, out_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', 'multi-list', '--init', 'adversarial-from-file', '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_bad_scenario(self, runner, out_dir, test_data_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', str(test_data_dir / 'bad_scenario.yaml'), '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_INPUT_ERROR
        assert 'ScenarioError' in result.output
        assert 'line' in result.output

    def test_sweep(self, runner, out_dir):
        result = runner.invoke(cli, [
            'run', '--scenario', 'multi-list', '--seeds', '1..6', '--workers', '2', '--out-dir', str(out_dir),
        ])
        assert result.exit_code == EXIT_STABILIZED, result.output
        assert result.output.count('stabilized moves=') == 6
        assert 'Moves per run' in result.output
        assert (out_dir / 'multi-list' / 'sweep.csv').exists()

    def test_bad_seed_range(self, runner, out_dir):
        result = runner.invoke(cli, ['run', '--scenario', 'multi-list', '--seeds', ',', '--out-dir', str(out_dir)])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestOracle:
    """Test suite for the oracle command."""

    def test_chain(self, runner, test_data_dir):
        result = runner.invoke(cli, ['oracle', '--which', 'chain', '--graph', str(test_data_dir / 'c5.txt')])
        assert result.exit_code == 0, result.output
        assert 'gamma' in result.output
        assert '✓' in result.output

    def test_cap_exceeded(self, runner, path17):
        result = runner.invoke(cli, ['oracle', '--which', 'chain', '--graph', str(path17)])
        assert result.exit_code == EXIT_INPUT_ERROR
        assert 'EnumerationCapError' in result.output

    def test_mis_check(self, runner, test_data_dir):
        result = runner.invoke(cli, [
            'oracle', '--which', 'mis-check', '--graph', str(test_data_dir / 'p4.txt'), '--members', 'A,C',
        ])
        assert result.exit_code == 0
        assert 'is maximal independent' in result.output

    def test_mds_check_fails(self, runner, test_data_dir):
        result = runner.invoke(cli, [
            'oracle', '--which', 'mds-check', '--graph', str(test_data_dir / 'flow.txt'), '--members', 'A,B,C',
        ])
        assert result.exit_code == 0
        assert 'is not 1-minimal dominating' in result.output

    def test_unknown_member(self, runner, test_data_dir):
        result = runner.invoke(cli, [
            'oracle', '--which', 'mis-check', '--graph', str(test_data_dir / 'p4.txt'), '--members', 'Q',
        ])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_joint_scenario(self, runner):
        result = runner.invoke(cli, ['oracle', '--which', 'joint', '--scenario', 'contention'])
        assert result.exit_code == 0, result.output
        assert 'any: infeasible' in result.output
        assert 'all: infeasible' in result.output

    def test_joint_full_supplier_graph(self, runner):
        result = runner.invoke(cli, ['oracle', '--which', 'joint', '--scenario', 'contention', '--full-supplier-graph'])
        assert result.exit_code == 0
        assert 'feasible, witness {A, C, E}' in result.output

    def test_joint_graphs(self, runner, test_data_dir):
        result = runner.invoke(cli, [
            'oracle', '--which', 'joint', '--graph', str(test_data_dir / 'suppliers.txt'),
            '--other-graph', str(test_data_dir / 'flow.txt'),
        ])
        assert result.exit_code == 0
        assert 'feasible' in result.output

    def test_missing_graph_file(self, runner, tmp_path):
        result = runner.invoke(cli, ['oracle', '--which', 'chain', '--graph', str(tmp_path / 'none.txt')])
        assert result.exit_code == EXIT_INPUT_ERROR


class TestDemo:
    """Test suite for demo-nonconvergence."""

    def test_default(self, runner):
        result = runner.invoke(cli, ['demo-nonconvergence'])
        assert result.exit_code == 0, result.output
        assert 'infeasible / livelock detected / hierarchical stabilized' in result.output

    def test_hierarchical_only(self, runner):
        result = runner.invoke(cli, ['demo-nonconvergence', '--hierarchical-only'])
        assert result.exit_code == 0
        assert 'hierarchical stabilized' in result.output
        assert 'livelock' not in result.output

    def test_public_supplier(self, runner):
        result = runner.invoke(cli, ['demo-nonconvergence', '--public-supplier', 'Y'])
        assert result.exit_code == 0
        assert 'Joint feasibility (any): feasible' in result.output


class TestExportAndValidate:
    """Test suite for export-dot, validate and info."""

    def test_export_scenario(self, runner, out_dir):
        result = runner.invoke(cli, ['export-dot', '--scenario', 'three-tier', '--out-dir', str(out_dir)])
        assert result.exit_code == 0, result.output
        names = sorted(path.name for path in (out_dir / 'three-tier').iterdir())
        assert names == ['BW.dot', 'MDS.dot', 'MIS.dot', 'columns.dot']
        assert 'BCD' in (out_dir / 'three-tier' / 'MIS.dot').read_text()

    def test_export_graph(self, runner, test_data_dir):
        result = runner.invoke(cli, ['export-dot', '--graph', str(test_data_dir / 'k3.txt')])
        assert result.exit_code == 0
        assert result.output.startswith('graph "k3" {')

    def test_validate_scenario(self, runner, scenarios_dir):
        result = runner.invoke(cli, ['validate', '--scenario', str(scenarios_dir / 'three_tier.yaml')])
        assert result.exit_code == 0, result.output
        assert '6 columns, 3 tiers (hierarchical)' in result.output

    def test_validate_shared(self, runner):
        result = runner.invoke(cli, ['validate', '--scenario', 'contention-equal'])
        assert result.exit_code == 0
        assert '(shared)' in result.output

    def test_validate_graph(self, runner, test_data_dir):
        result = runner.invoke(cli, ['validate', '--graph', str(test_data_dir / 'flow.txt')])
        assert result.exit_code == 0
        assert '6 nodes, 5 edges, connected' in result.output

    def test_validate_bad_graph(self, runner, test_data_dir):
        result = runner.invoke(cli, ['validate', '--graph', str(test_data_dir / 'bad_keyword.txt')])
        assert result.exit_code == EXIT_INPUT_ERROR
        assert 'line 2' in result.output

    def test_info(self, runner):
        result = runner.invoke(cli, ['info'])
        assert result.exit_code == 0
        assert 'ipstab' in result.output

    def test_version(self, runner):
        result = runner.invoke(cli, ['--version'])
        assert result.exit_code == 0
        assert '1.0.0' in result.output
