"""
Pytest configuration file.
"""

import pytest
import sys
from pathlib import Path

import networkx as nx

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from graph_core import Graph, graph_from_labels, graph_from_networkx  # noqa: E402
from protocols import AlgorithmId, Kind  # noqa: E402
from scenarios import (  # noqa: E402
    assemble_stack,
    contention_scenario,
    multi_list_scenario,
    hall_supplier_table,
    three_tier_scenario,
)


@pytest.fixture(scope="session")
def test_data_dir():
    """Fixture providing test data directory path."""
    return Path(__file__).parent / "test_data"


@pytest.fixture(scope="session")
def scenarios_dir():
    """Fixture providing the shipped scenario files."""
    return project_root / "data" / "scenarios"


@pytest.fixture
def path3():
    """A - B - C."""
    return graph_from_labels(['A', 'B', 'C'], [('A', 'B'), ('B', 'C')])


@pytest.fixture
def k3():
    return graph_from_networkx(nx.complete_graph(3))


@pytest.fixture
def p4():
    return graph_from_networkx(nx.path_graph(4))


@pytest.fixture
def c5():
    return graph_from_networkx(nx.cycle_graph(5))


@pytest.fixture
def star5():
    """Center 1 with leaves 2-5."""
    return Graph(range(1, 6), [(1, leaf) for leaf in range(2, 6)])


@pytest.fixture
def single_node():
    return Graph([1])


@pytest.fixture
def hall_suppliers():
    return hall_supplier_table()


@pytest.fixture
def multi_list():
    """(scenario, column graph, stack) for the two-list table."""
    scenario = multi_list_scenario()
    g, stack = assemble_stack(scenario)
    return scenario, g, stack


@pytest.fixture
def contention():
    scenario = contention_scenario()
    g, stack = assemble_stack(scenario)
    return scenario, g, stack


@pytest.fixture
def contention_equal():
    scenario = contention_scenario(equal_priority=True)
    g, stack = assemble_stack(scenario)
    return scenario, g, stack


@pytest.fixture
def three_tier():
    scenario = three_tier_scenario()
    g, stack = assemble_stack(scenario)
    return scenario, g, stack


@pytest.fixture
def algorithms():
    """One algorithm id per kind, prioritized BW < MIS < MDS."""
    return {
        Kind.BW: AlgorithmId(1, Kind.BW, 'BW'),
        Kind.MIS: AlgorithmId(2, Kind.MIS, 'MIS'),
        Kind.MDS: AlgorithmId(3, Kind.MDS, 'MDS'),
    }


@pytest.fixture
def out_dir(tmp_path):
    """Fixture providing a scratch output directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path


def pytest_configure(config):
    """Pytest configuration hook."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
