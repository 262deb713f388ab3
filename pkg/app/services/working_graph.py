"""
Partial final topology grown one leaf at a time during the search.

A node is settled when it hangs under its initial parent and that parent is
settled too (the root always is); settled nodes keep their initial label and
never move. Every other placed node gets a fresh label under its working
parent, and its move distance is measured against its anchor: the nearest
settled ancestor in the working graph. Those are exactly the moving flags,
anchors and distances plan_labels derives for the finished tree.
"""
from typing import Dict, List, Optional, Set, Tuple
import logging
from app.core.exceptions import UnknownNodeError
from app.schemas.common import NodeId
from app.schemas.flow import FlowSet
from app.schemas.topology import Label, LabeledTree, TreeTopology
from app.services.trie_service import label_distance, labeled_traffic

logger = logging.getLogger(__name__)


class WorkingGraph:
    def __init__(self, initial: LabeledTree, flows: Optional[FlowSet] = None):
        self.initial = initial
        self.root = initial.root
        self.weights: Dict[NodeId, Dict[NodeId, float]] = flows.pair_weights() if flows is not None else {}
        self.parent: Dict[NodeId, NodeId] = {}
        self.labels: Dict[NodeId, Label] = {self.root: initial.raw(self.root)}
        self.settled: Set[NodeId] = {self.root}
        self.anchor_of: Dict[NodeId, NodeId] = {self.root: self.root}
        self.next_suffix: Dict[NodeId, int] = {}
        # (node, parent, took a fresh suffix) per attach, popped by detach
        self._history: List[Tuple[NodeId, NodeId, bool]] = []
        # traffic among placed nodes after each attach; a stack so undo is exact
        self._traffic: List[float] = [0.0]

    @classmethod
    def seeded(cls, initial: LabeledTree, skeleton: TreeTopology, flows: Optional[FlowSet] = None) -> "WorkingGraph":
        """Working graph holding the skeleton, with the skeleton's own traffic as baseline"""
        graph = cls(initial, flows)
        for node in skeleton.bfs_order()[1:]:
            graph.attach(node, skeleton.parent[node])
        if flows is not None:
            graph._traffic = [labeled_traffic(graph.labels, flows, partial=True)]
            graph._history = []
        return graph

    @classmethod
    def from_topology(cls, topology: TreeTopology, initial: LabeledTree) -> "WorkingGraph":
        if topology.root != initial.root:
            raise UnknownNodeError(f"Working topology is rooted at {topology.root}, not {initial.root}")
        graph = cls(initial)
        for node in topology.bfs_order()[1:]:
            graph.attach(node, topology.parent[node])
        return graph

    @property
    def traffic(self) -> float:
        return self._traffic[-1]

    def __contains__(self, node: NodeId) -> bool:
        return node in self.labels

    def placed(self) -> List[NodeId]:
        return sorted(self.labels)

    def positions(self) -> List[NodeId]:
        """Placed nodes in breadth-first order of the working graph"""
        return sorted(self.labels, key=lambda node: (len(self.labels[node]), self.labels[node]))

    def _initial_parent(self, node: NodeId) -> Optional[NodeId]:
        return self.initial.topology.parent.get(node)

    def is_home(self, node: NodeId, parent: NodeId) -> bool:
        """Attaching node under parent keeps it where it started"""
        return parent in self.settled and self._initial_parent(node) == parent

    def anchor_for(self, parent: NodeId) -> NodeId:
        return parent if parent in self.settled else self.anchor_of[parent]

    def placement_distance(self, node: NodeId, parent: NodeId) -> int:
        """Hops node travels if it ends up as a child of parent"""
        if self.is_home(node, parent):
            return 0
        anchor = self.anchor_for(parent)
        down = len(self.labels[parent]) + 1 - len(self.labels[anchor])
        return label_distance(self.initial.raw(node), self.initial.raw(anchor)) + down - 2

    def traffic_delta(self, node: NodeId, parent: NodeId) -> float:
        """Traffic added by flows between node and already placed nodes"""
        here = self.labels[parent]
        added = 0.0
        for partner, weight in sorted(self.weights.get(node, {}).items()):
            if partner in self.labels:
                added += weight * (label_distance(here, self.labels[partner]) + 1)
        return added

    def _fresh_suffix(self, parent: NodeId) -> int:
        if parent not in self.next_suffix:
            if parent in self.settled:
                taken = [self.initial.raw(child)[-1] for child in self.initial.topology.children(parent)]
                self.next_suffix[parent] = max(taken) + 1 if taken else 0
            else:
                self.next_suffix[parent] = 0
        suffix = self.next_suffix[parent]
        self.next_suffix[parent] = suffix + 1
        return suffix

    def attach(self, node: NodeId, parent: NodeId) -> None:
        if node in self.labels:
            raise UnknownNodeError(f"Node {node} is already placed")
        if parent not in self.labels:
            raise UnknownNodeError(f"Cannot attach {node} under unplaced node {parent}")
        delta = self.traffic_delta(node, parent)
        home = self.is_home(node, parent)
        if home:
            self.labels[node] = self.initial.raw(node)
            self.settled.add(node)
            self.anchor_of[node] = node
        else:
            self.labels[node] = self.labels[parent] + (self._fresh_suffix(parent),)
            self.anchor_of[node] = self.anchor_for(parent)
        self.parent[node] = parent
        self._history.append((node, parent, not home))
        self._traffic.append(self.traffic + delta)

    def detach(self, node: NodeId) -> None:
        """Undo the most recent attach, which must be node's"""
        if not self._history or self._history[-1][0] != node:
            raise UnknownNodeError(f"Node {node} is not the last attached node")
        _, parent, fresh = self._history.pop()
        self._traffic.pop()
        if fresh:
            self.next_suffix[parent] -= 1
        # a re-attach may change settledness, so its child counter restarts
        self.next_suffix.pop(node, None)
        del self.labels[node]
        del self.parent[node]
        del self.anchor_of[node]
        self.settled.discard(node)

    def parent_map(self) -> Dict[NodeId, NodeId]:
        return dict(self.parent)

    def to_topology(self) -> TreeTopology:
        return TreeTopology.create(self.root, self.parent, self.labels)
