"""
JSON file records. These only describe shape; conversion into domain objects
runs the domain validators, so semantic problems surface as invariant errors.
"""
from pydantic import BaseModel, Field
from typing import Dict, List, Optional, Tuple
from app.core.exceptions import InvalidBudgetError, PlanMismatchError
from app.schemas.common import NodeId, build_model
from app.schemas.flow import FlowEntry, FlowSet
from app.schemas.optimizer import EnergyBudget
from app.schemas.reconfig import MovementTrace, PlanEntry, ReconfigPlan
from app.schemas.topology import LabeledTree, PrefixLabel, TreeTopology


class TopologyFile(BaseModel):
    root: NodeId
    edges: List[Tuple[NodeId, NodeId]] = Field(default_factory=list, description="(parent, child) pairs")
    nodes: Optional[List[NodeId]] = Field(None, description="Only needed for isolated roots")
    labels: Optional[Dict[NodeId, str]] = Field(None, description="Written on output, ignored on input")

    def to_topology(self) -> TreeTopology:
        return TreeTopology.from_edges(self.root, self.edges, self.nodes)

    @classmethod
    def from_tree(cls, tree) -> "TopologyFile":
        if isinstance(tree, LabeledTree):
            return cls(root=tree.root, edges=tree.topology.edges(), nodes=sorted(tree.nodes), labels=tree.rendered())
        return cls(root=tree.root, edges=tree.edges(), nodes=sorted(tree.nodes))


class FlowFile(BaseModel):
    flows: List[FlowEntry] = Field(default_factory=list)

    def to_flows(self) -> FlowSet:
        return FlowSet.from_entries(self.flows)


class BudgetRecord(BaseModel):
    node: NodeId
    hops: int


class BudgetFile(BaseModel):
    budgets: List[BudgetRecord] = Field(default_factory=list)

    def to_budget(self) -> EnergyBudget:
        budget: Dict[NodeId, int] = {}
        for record in self.budgets:
            if record.node in budget:
                raise InvalidBudgetError(f"Duplicate budget for node {record.node}")
            budget[record.node] = record.hops
        return EnergyBudget.create(budget)


class PlanRecord(BaseModel):
    node: NodeId
    moving: bool = False
    anchor_label: Optional[str] = None
    desired_label: Optional[str] = None
    move_distance: Optional[int] = None

    def to_entry(self) -> PlanEntry:
        return build_model(
            PlanEntry,
            PlanMismatchError,
            node=self.node,
            moving=self.moving,
            anchor_label=PrefixLabel.parse(self.anchor_label) if self.anchor_label is not None else None,
            desired_label=PrefixLabel.parse(self.desired_label) if self.desired_label is not None else None,
            move_distance=self.move_distance,
        )

    @classmethod
    def from_entry(cls, entry: PlanEntry) -> "PlanRecord":
        return cls(
            node=entry.node,
            moving=entry.moving,
            anchor_label=entry.anchor_label.render() if entry.anchor_label else None,
            desired_label=entry.desired_label.render() if entry.desired_label else None,
            move_distance=entry.move_distance,
        )


class PlanFile(BaseModel):
    root: NodeId
    label_first_suffix: int = 0
    entries: List[PlanRecord] = Field(default_factory=list)

    @classmethod
    def from_plan(cls, plan: ReconfigPlan) -> "PlanFile":
        return cls(
            root=plan.initial.root,
            label_first_suffix=plan.label_first_suffix,
            entries=[PlanRecord.from_entry(plan.entries[node]) for node in sorted(plan.entries)],
        )

    def to_plan(self, initial: LabeledTree) -> ReconfigPlan:
        if self.root != initial.root:
            raise PlanMismatchError(f"Plan is rooted at {self.root} but the topology at {initial.root}")
        return ReconfigPlan.from_entries(initial, [record.to_entry() for record in self.entries],
                                         self.label_first_suffix)


class StepRecord(BaseModel):
    index: int
    node: NodeId
    stage: str
    from_neighbor: NodeId = Field(..., alias="from")
    to_neighbor: NodeId = Field(..., alias="to")
    connected: bool
    relabeled_to: Optional[str] = None
    links: List[Tuple[NodeId, NodeId]]

    class Config:
        populate_by_name = True


class TraceFile(BaseModel):
    steps: List[StepRecord] = Field(default_factory=list)
    final: Optional[TopologyFile] = None

    @classmethod
    def from_trace(cls, trace: MovementTrace) -> "TraceFile":
        steps = [
            StepRecord(
                index=step.index,
                node=step.node,
                stage=step.stage.value,
                from_neighbor=step.from_neighbor,
                to_neighbor=step.to_neighbor,
                connected=step.connected,
                relabeled_to=step.relabeled_to.render() if step.relabeled_to else None,
                links=list(step.links),
            )
            for step in trace.steps
        ]
        final = TopologyFile.from_tree(trace.final) if trace.final is not None else None
        return cls(steps=steps, final=final)
