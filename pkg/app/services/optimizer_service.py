"""
Final topology selection.

classify splits the network into active movers, passive movers and the fixed
skeleton. BranchAndBoundSearch enumerates every order of the active movers and
every attachment position for each, keeping the cheapest budget-feasible tree;
with pruning disabled the same search is the exhaustive oracle. The greedy pass
places one mover per step at the cheapest feasible slot. Passive movers are
repositioned afterwards by minimum move distance.
"""
from typing import Dict, Iterable, Optional, Sequence, Set, Tuple
import itertools
import logging
import math
import time
from app.core.config import settings
from app.core.exceptions import InvalidParameterError, PlacementError, SearchSpaceTooLargeError, UnknownNodeError
from app.schemas.common import NodeId
from app.schemas.flow import FlowSet
from app.schemas.optimizer import (
    Algorithm, BoundMode, Classification, EnergyBudget, SearchResult
)
from app.schemas.topology import LabeledTree, TreeTopology
from app.services.reconfig_service import plan_labels
from app.services.trie_service import aggregate_traffic, assign_prefix_labels, labeled_traffic
from app.services.working_graph import WorkingGraph

logger = logging.getLogger(__name__)


def _check_inputs(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget) -> None:
    unknown = sorted(flows.endpoints() - initial.nodes)
    if unknown:
        raise UnknownNodeError(f"Flows reference nodes {unknown} that are not in the topology")
    unknown = sorted(set(budgets.budget) - initial.nodes)
    if unknown:
        raise UnknownNodeError(f"Budgets reference nodes {unknown} that are not in the topology")


def classify(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget) -> Classification:
    """Moving node selection"""
    _check_inputs(initial, flows, budgets)
    topology = initial.topology
    root = topology.root

    active: Set[NodeId] = set()
    for node in sorted(topology.nodes):
        if node == root or not flows.has_flow(node) or budgets.hops(node, root) < 1:
            continue
        # every descendant must afford to climb out of node's subtree
        depth = topology.depth(node)
        if all(budgets.hops(d, root) >= topology.depth(d) - depth for d in topology.descendants(node)):
            active.add(node)

    passive: Set[NodeId] = set()
    for node in sorted(active):
        passive.update(d for d in topology.descendants(node) if not flows.has_flow(d))

    skeleton = topology.induced(topology.nodes - active - passive)
    logger.debug(f"Active movers {sorted(active)}, passive movers {sorted(passive)}")
    return Classification(active_moving=frozenset(active), passive_moving=frozenset(passive), skeleton=skeleton)


FlowItems = Sequence[Tuple[Tuple[NodeId, NodeId], float]]


def _remaining(items: FlowItems, unplaced: Set[NodeId], mode: BoundMode) -> float:
    if not unplaced:
        return 0.0
    if mode == BoundMode.ADMISSIBLE:
        return math.fsum(rate for (src, dst), rate in items if src in unplaced or dst in unplaced)
    return math.fsum(
        rate for node in sorted(unplaced) for (src, dst), rate in items if src == node or dst == node
    )


def remaining_flow(flows: FlowSet, unplaced: Iterable[NodeId], mode: BoundMode = BoundMode.ADMISSIBLE) -> float:
    """
    Estimate of the traffic still to be added by unplaced nodes.
    Admissible: every flow touching an unplaced node costs at least one hop,
    counted once. Literal: each unplaced node's in and out flows summed per node,
    so a flow between two unplaced nodes counts twice and the estimate can
    overshoot the best completion.
    """
    return _remaining(flows.items(), set(unplaced), mode)


def lower_bound(partial: TreeTopology, flows: FlowSet, unplaced: Sequence[NodeId],
                mode: BoundMode = BoundMode.ADMISSIBLE) -> float:
    """Traffic among placed nodes plus the remaining-flow bound"""
    overlap = sorted(set(unplaced) & partial.nodes)
    if overlap:
        raise InvalidParameterError(f"Nodes {overlap} are both placed and unplaced")
    placed = assign_prefix_labels(partial).raw_labels()
    return labeled_traffic(placed, flows, partial=True) + remaining_flow(flows, unplaced, mode)


def _attach_passive_into(graph: WorkingGraph, passive: Iterable[NodeId], budgets: EnergyBudget) -> None:
    root = graph.root
    for node in sorted(passive):
        allowed = budgets.hops(node, root)
        best: Optional[Tuple[int, NodeId]] = None
        for position in graph.positions():
            distance = graph.placement_distance(node, position)
            if distance <= allowed and (best is None or distance < best[0]):
                best = (distance, position)
        if best is None:
            # the initial parent of its topmost moving ancestor is a fixed node
            # costing exactly the node's depth below that ancestor, which the
            # selection rule makes affordable
            raise PlacementError(f"No position within budget for passive node {node}")
        graph.attach(node, best[1])
        logger.debug(f"Passive node {node} placed under {best[1]} ({best[0]} hops)")


def attach_passive(working: TreeTopology, passive: Iterable[NodeId], initial: LabeledTree,
                   budgets: EnergyBudget) -> TreeTopology:
    """Reposition passive moving nodes, each at its minimum move distance"""
    passive = sorted(passive)
    clash = sorted(set(passive) & working.nodes)
    if clash:
        raise InvalidParameterError(f"Passive nodes {clash} are already in the working graph")
    if not passive:
        return working
    graph = WorkingGraph.from_topology(working, initial)
    _attach_passive_into(graph, passive, budgets)
    return graph.to_topology()


class BranchAndBoundSearch:
    """
    Depth-first search over (order of active movers) x (attachment positions).
    A leaf replaces the incumbent only on strict improvement; a branch is cut
    once its bound reaches the incumbent.
    """

    def __init__(self, initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget,
                 classification: Classification, bound: Optional[BoundMode] = BoundMode.ADMISSIBLE):
        self.initial = initial
        self.flows = flows
        self.budgets = budgets
        self.classification = classification
        self.bound = bound
        self.epsilon = settings.IMPROVEMENT_EPSILON
        self._flow_items = [(pair, rate) for pair, rate in flows.items() if rate > 0]
        self.graph = WorkingGraph.seeded(initial, classification.skeleton, flows)
        self.best_traffic = aggregate_traffic(initial, flows)
        self.best_parent: Optional[Dict[NodeId, NodeId]] = None
        self.nodes_explored = 0
        self.nodes_pruned = 0
        self.leaves_explored = 0

    def run(self) -> Optional[Dict[NodeId, NodeId]]:
        movers = sorted(self.classification.active_moving)
        for order in itertools.permutations(movers):
            self._descend(order, 0)
        return self.best_parent

    def _descend(self, order: Tuple[NodeId, ...], k: int) -> None:
        if k == len(order):
            self.leaves_explored += 1
            if self.graph.traffic < self.best_traffic - self.epsilon:
                logger.debug(f"Incumbent {self.best_traffic:.6f} -> {self.graph.traffic:.6f} (order {order})")
                self.best_traffic = self.graph.traffic
                self.best_parent = self.graph.parent_map()
            return
        node = order[k]
        allowed = self.budgets.hops(node, self.initial.root)
        rest = order[k + 1:]
        for position in self.graph.positions():
            if self.graph.placement_distance(node, position) > allowed:
                continue
            self.graph.attach(node, position)
            self.nodes_explored += 1
            if self.bound is not None:
                estimate = self.graph.traffic + _remaining(self._flow_items, set(rest), self.bound)
                if estimate >= self.best_traffic:
                    self.nodes_pruned += 1
                    self.graph.detach(node)
                    continue
            self._descend(order, k + 1)
            self.graph.detach(node)


def _finish(algorithm: Algorithm, initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget,
            classification: Classification, parent: Optional[Dict[NodeId, NodeId]], started: float,
            bound: Optional[BoundMode] = None, explored: int = 0, pruned: int = 0, leaves: int = 0) -> SearchResult:
    traffic_initial = aggregate_traffic(initial, flows)
    desired = initial.topology
    if parent is not None:
        graph = WorkingGraph.from_topology(TreeTopology.create(initial.root, parent), initial)
        _attach_passive_into(graph, classification.passive_moving, budgets)
        desired = graph.to_topology()
    plan = plan_labels(initial, desired)
    final = plan.desired_tree()
    traffic = aggregate_traffic(final, flows)
    if traffic >= traffic_initial - settings.IMPROVEMENT_EPSILON and parent is not None:
        # no strict gain once passive nodes are back: stay put
        plan = plan_labels(initial, initial.topology)
        final = plan.desired_tree()
        traffic = aggregate_traffic(final, flows)
    elapsed = (time.perf_counter() - started) * 1000.0
    result = SearchResult(
        algorithm=algorithm,
        bound=bound,
        final=final,
        traffic=traffic,
        traffic_initial=traffic_initial,
        plan=plan,
        classification=classification,
        nodes_explored=explored,
        nodes_pruned=pruned,
        leaves_explored=leaves,
        wall_time_ms=elapsed,
    )
    logger.info(
        f"{algorithm.value}: traffic {traffic_initial:.6f} -> {traffic:.6f}, "
        f"{len(plan.moving_nodes())} moving, explored {explored}, pruned {pruned}, {elapsed:.1f} ms"
    )
    return result


def optimize_bnb(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget,
                 bound: BoundMode = BoundMode.ADMISSIBLE) -> SearchResult:
    """Optimal algorithm with branch-and-bound"""
    started = time.perf_counter()
    classification = classify(initial, flows, budgets)
    search = BranchAndBoundSearch(initial, flows, budgets, classification, bound)
    parent = search.run()
    return _finish(Algorithm.OPTIMAL, initial, flows, budgets, classification, parent, started, bound=bound,
                   explored=search.nodes_explored, pruned=search.nodes_pruned, leaves=search.leaves_explored)


def brute_force_oracle(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget) -> SearchResult:
    """Exhaustive version of the branch-and-bound search, for cross-checking"""
    started = time.perf_counter()
    classification = classify(initial, flows, budgets)
    active = len(classification.active_moving)
    if active > settings.ORACLE_MAX_ACTIVE:
        raise SearchSpaceTooLargeError(
            f"Oracle refuses {active} active movers (limit {settings.ORACLE_MAX_ACTIVE})"
        )
    search = BranchAndBoundSearch(initial, flows, budgets, classification, bound=None)
    parent = search.run()
    return _finish(Algorithm.ORACLE, initial, flows, budgets, classification, parent, started,
                   explored=search.nodes_explored, leaves=search.leaves_explored)


def optimize_greedy(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget) -> SearchResult:
    """
    Greedy algorithm: each step evaluates every (unplaced mover, placed position)
    pair and commits the cheapest feasible one. Ties go to the lowest mover id,
    then the lowest position id.
    """
    started = time.perf_counter()
    classification = classify(initial, flows, budgets)
    graph = WorkingGraph.seeded(initial, classification.skeleton, flows)
    root = initial.root
    unplaced = sorted(classification.active_moving)
    evaluations = 0

    while unplaced:
        best: Optional[Tuple[float, NodeId, NodeId]] = None
        for node in unplaced:
            allowed = budgets.hops(node, root)
            for position in graph.placed():
                evaluations += 1
                if graph.placement_distance(node, position) > allowed:
                    continue
                value = graph.traffic + graph.traffic_delta(node, position)
                if best is None or value < best[0]:
                    best = (value, node, position)
        if best is None:
            # every active mover fits under the initial parent of its topmost
            # moving ancestor, a skeleton node
            raise PlacementError(f"Greedy found no feasible slot for nodes {unplaced}")
        _, node, position = best
        graph.attach(node, position)
        unplaced.remove(node)
        logger.debug(f"Greedy placed {node} under {position}, working traffic {graph.traffic:.6f}")

    parent = graph.parent_map() if classification.active_moving else None
    return _finish(Algorithm.GREEDY, initial, flows, budgets, classification, parent, started,
                   explored=evaluations)


def optimize(initial: LabeledTree, flows: FlowSet, budgets: EnergyBudget,
             algorithm: Algorithm = Algorithm.OPTIMAL, bound: Optional[BoundMode] = None) -> SearchResult:
    if algorithm == Algorithm.GREEDY:
        return optimize_greedy(initial, flows, budgets)
    if algorithm == Algorithm.ORACLE:
        return brute_force_oracle(initial, flows, budgets)
    if algorithm == Algorithm.OPTIMAL:
        return optimize_bnb(initial, flows, budgets, bound or BoundMode(settings.DEFAULT_BOUND))
    raise InvalidParameterError(f"Unknown algorithm {algorithm}")
