from pydantic import BaseModel, Field, model_validator
from typing import Dict, Iterable, List, Optional, Tuple
from enum import Enum
from app.core.exceptions import InvalidTopologyError, PlanMismatchError
from app.schemas.common import NodeId, build_model
from app.schemas.topology import LabeledTree, PrefixLabel, TreeTopology


class PlanEntry(BaseModel):
    """Per-node reconfiguration instruction (the M.Dest payload for moving nodes)"""
    node: NodeId
    moving: bool = False
    anchor_label: Optional[PrefixLabel] = None
    desired_label: Optional[PrefixLabel] = None
    move_distance: Optional[int] = Field(None, ge=0)

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_payload(self):
        payload = (self.anchor_label, self.desired_label, self.move_distance)
        if self.moving and any(item is None for item in payload):
            raise ValueError(f'Moving node {self.node} needs anchor_label, desired_label and move_distance')
        if not self.moving and any(item is not None for item in payload):
            raise ValueError(f'Non-moving node {self.node} must not carry movement data')
        return self


class ReconfigPlan(BaseModel):
    """Moving flags, anchor and desired labels for every node of the network"""
    entries: Dict[NodeId, PlanEntry]
    initial: LabeledTree
    desired: TreeTopology
    label_first_suffix: int = 0

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_plan(self):
        nodes = set(self.initial.nodes)
        if set(self.entries) != nodes:
            raise ValueError('Plan entries must cover exactly the network nodes')
        if set(self.desired.nodes) != nodes:
            raise ValueError('Desired topology has a different node set')
        if self.desired.root != self.initial.root:
            raise ValueError('Desired topology has a different root')
        for node, entry in self.entries.items():
            if entry.node != node:
                raise ValueError(f'Entry keyed {node} describes node {entry.node}')
        return self

    @classmethod
    def create(cls, entries: Dict[NodeId, PlanEntry], initial: LabeledTree, desired: TreeTopology,
               label_first_suffix: int = 0) -> "ReconfigPlan":
        return build_model(cls, PlanMismatchError, entries=entries, initial=initial, desired=desired,
                           label_first_suffix=label_first_suffix)

    @classmethod
    def from_entries(cls, initial: LabeledTree, entries: Iterable[PlanEntry], label_first_suffix: int = 0) -> "ReconfigPlan":
        """
        Rebuild a plan from exported entries.
        Non-moving nodes keep their initial parent; a moving node hangs under the
        node whose final label is its desired label minus the last symbol.
        """
        by_node = {}
        for entry in entries:
            if entry.node in by_node:
                raise PlanMismatchError(f"Duplicate plan entry for node {entry.node}")
            by_node[entry.node] = entry
        missing = sorted(set(initial.nodes) - set(by_node))
        if missing:
            raise PlanMismatchError(f"Plan has no entries for nodes {missing}")
        final_owner = {}
        for node, entry in by_node.items():
            label = entry.desired_label if entry.moving else initial.labels.get(node)
            if label is None:
                raise PlanMismatchError(f"Plan entry for unknown node {node}")
            if label.symbols in final_owner:
                raise PlanMismatchError(f"Nodes {final_owner[label.symbols]} and {node} end with label {label}")
            final_owner[label.symbols] = node
        parent = {}
        for node, entry in by_node.items():
            if node == initial.root:
                if entry.moving:
                    raise PlanMismatchError("The root never moves")
                continue
            if not entry.moving:
                parent[node] = initial.topology.parent[node]
                continue
            owner = final_owner.get(entry.desired_label.symbols[:-1])
            if owner is None:
                raise PlanMismatchError(f"No node owns the parent of desired label {entry.desired_label}")
            parent[node] = owner
        try:
            desired = TreeTopology.create(initial.root, parent, initial.nodes)
        except InvalidTopologyError as exc:
            raise PlanMismatchError(f"Plan does not describe a tree: {exc.detail}") from exc
        return cls.create(by_node, initial, desired, label_first_suffix)

    def entry(self, node: NodeId) -> PlanEntry:
        if node not in self.entries:
            raise PlanMismatchError(f"No plan entry for node {node}")
        return self.entries[node]

    def moving_nodes(self) -> List[NodeId]:
        return sorted(node for node, entry in self.entries.items() if entry.moving)

    def is_empty(self) -> bool:
        return not self.moving_nodes()

    def final_labels(self) -> Dict[NodeId, PrefixLabel]:
        return {
            node: entry.desired_label if entry.moving else self.initial.labels[node]
            for node, entry in self.entries.items()
        }

    def desired_tree(self) -> LabeledTree:
        """Desired topology labeled with the labels nodes carry after reconfiguration"""
        try:
            return LabeledTree.create(self.desired, self.final_labels())
        except InvalidTopologyError as exc:
            raise PlanMismatchError(f"Desired labels are inconsistent: {exc.detail}") from exc

    def total_move_distance(self) -> int:
        return sum(entry.move_distance or 0 for entry in self.entries.values())


class MovementStage(str, Enum):
    EVACUATE = "evacuate"   # climbing out of its own moving subtree
    TRANSIT = "transit"     # prefix-routed toward the anchor
    FORWARD = "forward"     # forwarded by the anchor down the desired labels


class MovementStep(BaseModel):
    """One node crossing one edge, with the link snapshot right after the move"""
    index: int
    node: NodeId
    stage: MovementStage
    from_neighbor: NodeId
    to_neighbor: NodeId
    links: Tuple[Tuple[NodeId, NodeId], ...]
    connected: bool
    relabeled_to: Optional[PrefixLabel] = None

    class Config:
        frozen = True


class MovementTrace(BaseModel):
    steps: List[MovementStep] = Field(default_factory=list)
    final: Optional[LabeledTree] = None

    def steps_per_node(self) -> Dict[NodeId, int]:
        counts: Dict[NodeId, int] = {}
        for step in self.steps:
            counts[step.node] = counts.get(step.node, 0) + 1
        return counts

    def all_connected(self) -> bool:
        return all(step.connected for step in self.steps)

    def relabel_order(self) -> List[Tuple[NodeId, str]]:
        return [(step.node, step.relabeled_to.render()) for step in self.steps if step.relabeled_to is not None]
