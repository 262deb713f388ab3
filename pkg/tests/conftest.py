import json
import pytest
from app.schemas.flow import FlowSet
from app.schemas.optimizer import EnergyBudget
from app.schemas.topology import TreeTopology
from app.services.trie_service import assign_prefix_labels

# Worked example network: A=0 is the root, then 01=1, 02=2, 03=3, 011=4, 0111=5, 021=6
WORKED_EDGES = [(0, 1), (0, 2), (0, 3), (1, 4), (4, 5), (2, 6)]
WORKED_DESIRED_EDGES = [(0, 1), (0, 2), (0, 3), (2, 4), (4, 5), (2, 6)]


@pytest.fixture
def worked_tree():
    return TreeTopology.from_edges(0, WORKED_EDGES)


@pytest.fixture
def worked_example(worked_tree):
    """Labeled with suffixes starting at 1, the way the example prints them"""
    return assign_prefix_labels(worked_tree, first_suffix=1)


@pytest.fixture
def worked_desired():
    return TreeTopology.from_edges(0, WORKED_DESIRED_EDGES)


@pytest.fixture
def chain_instance():
    """r=0 -> a=1 -> b=2, b sends 1 Mbps to the root"""
    tree = assign_prefix_labels(TreeTopology.from_edges(0, [(0, 1), (1, 2)]))
    flows = FlowSet.create({(2, 0): 1.0})
    budgets = EnergyBudget.create({0: 0, 1: 3, 2: 2})
    return tree, flows, budgets


@pytest.fixture
def gap_instance():
    """
    Three active movers where greedy commits early and gets stuck, and where
    counting shared flows twice prunes the optimum.
    """
    tree = assign_prefix_labels(TreeTopology.from_edges(0, [(0, 1), (1, 2), (1, 3), (0, 4)]))
    flows = FlowSet.create({(1, 0): 0.25, (2, 3): 1.0})
    budgets = EnergyBudget.create({0: 0, 1: 1, 2: 1, 3: 1, 4: 0})
    return tree, flows, budgets


@pytest.fixture
def write_json(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        if isinstance(payload, str):
            path.write_text(payload)
        else:
            path.write_text(json.dumps(payload, indent=2))
        return path
    return _write
