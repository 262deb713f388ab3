"""
Reconfiguration planning and simulation.

plan_labels sweeps the desired tree breadth-first and decides, per node, whether
it keeps its initial prefix label or must move (and then where to: anchor label
plus desired label). MovementSimulator executes a plan one edge at a time and
audits connectivity after every step.
"""
from typing import Dict, List, Optional, Set
import logging
import networkx as nx
from app.core.config import settings
from app.core.exceptions import (
    ConnectivityViolationError, PlanMismatchError, TopologyOptimizerError
)
from app.schemas.common import NodeId
from app.schemas.optimizer import EnergyBudget
from app.schemas.reconfig import MovementStage, MovementStep, MovementTrace, PlanEntry, ReconfigPlan
from app.schemas.topology import Label, LabeledTree, PrefixLabel, TreeTopology
from app.services.trie_service import label_distance, next_hop

logger = logging.getLogger(__name__)


def _unique_suffix(initial: LabeledTree, parent_label: Label, assigned: Dict[Label, Set[int]], first_suffix: int) -> int:
    """
    GetUniqueDesiredLabel: smallest suffix >= first_suffix that no initial child
    of parent_label and no earlier desired label under it already uses.
    """
    used = assigned.get(parent_label)
    if used is None:
        used = set()
        owner = initial.node_for(PrefixLabel(symbols=parent_label))
        if owner is not None:
            used.update(initial.raw(child)[-1] for child in initial.topology.children(owner))
        assigned[parent_label] = used
    suffix = first_suffix
    while suffix in used:
        suffix += 1
    used.add(suffix)
    return suffix


def plan_labels(initial: LabeledTree, desired: TreeTopology, first_suffix: Optional[int] = None) -> ReconfigPlan:
    """Label assignment: moving flags, anchor labels and desired labels for a desired tree"""
    if first_suffix is None:
        first_suffix = settings.LABEL_FIRST_SUFFIX
    if set(desired.nodes) != set(initial.nodes):
        extra = sorted(set(desired.nodes) ^ set(initial.nodes))
        raise PlanMismatchError(f"Initial and desired topologies differ in nodes {extra}")
    if desired.root != initial.root:
        raise PlanMismatchError(f"Desired root {desired.root} differs from initial root {initial.root}")

    moving: Dict[NodeId, bool] = {desired.root: False}
    anchor: Dict[NodeId, NodeId] = {}
    final_label: Dict[NodeId, Label] = {desired.root: initial.raw(desired.root)}
    assigned: Dict[Label, Set[int]] = {}

    for node in desired.bfs_order()[1:]:
        up = desired.parent[node]
        if not moving[up]:
            stays = initial.raw(node)[:-1] == initial.raw(up)
            moving[node] = not stays
            if stays:
                final_label[node] = initial.raw(node)
                continue
            anchor[node] = up
        else:
            moving[node] = True
            anchor[node] = anchor[up]
        parent_label = final_label[up]
        final_label[node] = parent_label + (_unique_suffix(initial, parent_label, assigned, first_suffix),)

    entries: Dict[NodeId, PlanEntry] = {}
    for node in sorted(desired.nodes):
        if not moving[node]:
            entries[node] = PlanEntry(node=node)
            continue
        anchor_label = initial.raw(anchor[node])
        distance = (label_distance(initial.raw(node), anchor_label)
                    + label_distance(final_label[node], anchor_label) - 2)
        entries[node] = PlanEntry(
            node=node,
            moving=True,
            anchor_label=PrefixLabel(symbols=anchor_label),
            desired_label=PrefixLabel(symbols=final_label[node]),
            move_distance=distance,
        )
    plan = ReconfigPlan.create(entries, initial, desired, first_suffix)
    logger.debug(f"Planned {len(plan.moving_nodes())} moving nodes: {plan.moving_nodes()}")
    return plan


def move_distance(initial: LabeledTree, desired: LabeledTree, v: NodeId, anchor: NodeId) -> int:
    """Hops v travels: up to its anchor through the initial tree, then down the desired one"""
    if initial.raw(v) == desired.raw(v):
        logger.debug(f"Node {v} keeps its label; it does not move")
        return 0
    distance = trie_distance_between(initial, v, anchor) + trie_distance_between(desired, v, anchor) - 2
    return max(distance, 0)


def trie_distance_between(tree: LabeledTree, u: NodeId, v: NodeId) -> int:
    return label_distance(tree.raw(u), tree.raw(v))


def feasible(initial: LabeledTree, desired: TreeTopology, budgets: EnergyBudget) -> bool:
    """Whether prefix-routing reconfiguration reaches desired within every hop budget"""
    try:
        plan = plan_labels(initial, desired)
    except TopologyOptimizerError as exc:
        logger.debug(f"Infeasible desired topology: {exc.detail}")
        return False
    if plan.entry(initial.root).moving:
        return False
    for node in plan.moving_nodes():
        if plan.entry(node).move_distance > budgets.hops(node, initial.root):
            return False
    return True


class MovementSimulator:
    """
    Serial execution of a plan.

    Evacuation: deepest moving nodes first, each climbs its own moving subtree
    until it hangs off a non-moving node. Transit: shallowest first, each is
    prefix-routed to its anchor. Forwarding: in desired breadth-first order the
    anchor forwards each node down its desired label. A node is relabeled the
    moment it becomes adjacent to its desired parent in that parent's final place.
    """

    def __init__(self, plan: ReconfigPlan):
        self.plan = plan
        self.initial = plan.initial
        self.root = plan.initial.root
        self.moving = set(plan.moving_nodes())
        self.links: Dict[NodeId, Set[NodeId]] = {node: set() for node in self.initial.nodes}
        for up, down in self.initial.topology.edges():
            self.links[up].add(down)
            self.links[down].add(up)
        self.label_of: Dict[NodeId, Label] = self.initial.raw_labels()
        self.owner: Dict[Label, NodeId] = {label: node for node, label in self.label_of.items()}
        self.attached: Dict[NodeId, NodeId] = {node: self.initial.topology.parent[node] for node in self.moving}
        self.desired_parent: Dict[NodeId, NodeId] = dict(plan.desired.parent)
        self.relabeled: Set[NodeId] = set()
        self.steps: List[MovementStep] = []
        # any route is shorter than this; hitting it means the plan loops
        self.max_steps = 4 * len(self.initial.nodes) ** 2 + 4

    def run(self) -> MovementTrace:
        if not self.moving:
            return MovementTrace(steps=[], final=self.initial)

        for node in sorted(self.moving, key=lambda v: (-self.initial.topology.depth(v), v)):
            anchor_label = self.plan.entry(node).anchor_label.symbols
            while self.attached[node] in self.moving:
                self._route(node, anchor_label, MovementStage.EVACUATE)

        for node in sorted(self.moving, key=lambda v: (self.initial.topology.depth(v), v)):
            anchor_label = self.plan.entry(node).anchor_label.symbols
            while self.label_of[self.attached[node]] != anchor_label:
                self._route(node, anchor_label, MovementStage.TRANSIT)
            self._maybe_relabel(node)

        for node in self.plan.desired.bfs_order():
            if node not in self.moving or node in self.relabeled:
                continue
            target = self.plan.entry(node).desired_label.symbols
            while next_hop(self.label_of[self.attached[node]], target) != target:
                self._route(node, target, MovementStage.FORWARD)
            self._maybe_relabel(node)

        unlabeled = sorted(self.moving - self.relabeled)
        if unlabeled:
            raise PlanMismatchError(f"Nodes {unlabeled} never reached their desired parent")
        return MovementTrace(steps=self.steps, final=self._final_tree())

    def _route(self, node: NodeId, target: Label, stage: MovementStage) -> None:
        here = self.attached[node]
        hop = next_hop(self.label_of[here], target)
        there = self.owner.get(hop) if hop is not None else None
        if there is None or there == node:
            raise PlanMismatchError(f"Node {node} cannot route from {here} toward label {'.'.join(map(str, target))}")
        if there not in self.links[here]:
            raise PlanMismatchError(f"Node {node} cannot step from {here} to {there}: they are not linked")
        self._step(node, here, there, stage)

    def _step(self, node: NodeId, here: NodeId, there: NodeId, stage: MovementStage) -> None:
        if len(self.steps) >= self.max_steps:
            raise PlanMismatchError("Movement does not terminate; the plan routes in circles")
        # the moving robot leaves every link it had and joins there
        for neighbor in self.links[node]:
            self.links[neighbor].discard(node)
        self.links[node] = {there}
        self.links[there].add(node)
        self.attached[node] = there

        relabel = self._maybe_relabel(node, record=False)
        snapshot = tuple(sorted((min(a, b), max(a, b)) for a in self.links for b in self.links[a] if a < b))
        graph = nx.Graph()
        graph.add_nodes_from(self.links)
        graph.add_edges_from(snapshot)
        connected = nx.is_connected(graph)
        step = MovementStep(
            index=len(self.steps),
            node=node,
            stage=stage,
            from_neighbor=here,
            to_neighbor=there,
            links=snapshot,
            connected=connected,
            relabeled_to=PrefixLabel(symbols=relabel) if relabel is not None else None,
        )
        self.steps.append(step)
        logger.debug(f"step {step.index}: {node} {here}->{there} ({stage.value}) connected={connected}")
        if not connected:
            raise ConnectivityViolationError(
                f"Step {step.index} moving node {node} from {here} to {there} disconnected the network",
                trace=MovementTrace(steps=list(self.steps)),
            )

    def _maybe_relabel(self, node: NodeId, record: bool = True) -> Optional[Label]:
        if node in self.relabeled:
            return None
        up = self.desired_parent.get(node)
        if self.attached.get(node) != up:
            return None
        if up in self.moving and up not in self.relabeled:
            return None
        new_label = self.plan.entry(node).desired_label.symbols
        del self.owner[self.label_of[node]]
        self.label_of[node] = new_label
        self.owner[new_label] = node
        self.relabeled.add(node)
        if record:
            logger.debug(f"Node {node} relabeled to {'.'.join(map(str, new_label))} without moving")
        return new_label

    def _final_tree(self) -> LabeledTree:
        edges = [(a, b) for a in self.links for b in self.links[a] if a < b]
        topology = TreeTopology.from_undirected(self.root, edges, self.initial.nodes)
        if dict(topology.parent) != dict(self.plan.desired.parent):
            raise PlanMismatchError("Simulation finished in a topology other than the desired one")
        return LabeledTree.create(topology, {node: PrefixLabel(symbols=label) for node, label in self.label_of.items()})


def simulate(plan: ReconfigPlan) -> MovementTrace:
    """Execute the plan step by step; raises ConnectivityViolationError on a disconnecting step"""
    trace = MovementSimulator(plan).run()
    logger.info(f"Simulated {len(trace.steps)} movement steps for {len(plan.moving_nodes())} moving nodes")
    return trace
