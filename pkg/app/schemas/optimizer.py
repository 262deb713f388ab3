from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, FrozenSet, Iterable, Optional
from enum import Enum
from app.core.exceptions import InvalidBudgetError, UnknownNodeError
from app.schemas.common import NodeId, build_model
from app.schemas.reconfig import ReconfigPlan
from app.schemas.topology import LabeledTree, TreeTopology


class Algorithm(str, Enum):
    GREEDY = "greedy"
    OPTIMAL = "optimal"
    ORACLE = "oracle"


class BoundMode(str, Enum):
    ADMISSIBLE = "admissible"
    LITERAL = "paper-literal"


class EnergyBudget(BaseModel):
    """Per-node hop allowance h_v; the root's effective budget is always 0"""
    budget: Dict[NodeId, int] = Field(default_factory=dict)

    class Config:
        frozen = True

    @field_validator('budget')
    def validate_budget(cls, v):
        negative = sorted(node for node, hops in v.items() if hops < 0)
        if negative:
            raise ValueError(f'Negative hop budget for nodes {negative}')
        return v

    @classmethod
    def create(cls, budget: Dict[NodeId, int]) -> "EnergyBudget":
        return build_model(cls, InvalidBudgetError, budget=dict(budget))

    @classmethod
    def covering(cls, nodes: Iterable[NodeId], budget: Optional[Dict[NodeId, int]] = None) -> "EnergyBudget":
        """Budget with an entry for every node; unlisted nodes get 0"""
        budget = budget or {}
        nodes = set(nodes)
        unknown = sorted(set(budget) - nodes)
        if unknown:
            raise UnknownNodeError(f"Budget given for unknown nodes {unknown}")
        return cls.create({node: budget.get(node, 0) for node in sorted(nodes)})

    @classmethod
    def uniform(cls, nodes: Iterable[NodeId], hops: int) -> "EnergyBudget":
        return cls.create({node: hops for node in nodes})

    def hops(self, node: NodeId, root: Optional[NodeId] = None) -> int:
        if node == root:
            return 0
        return self.budget.get(node, 0)

    def raised(self, extra: int) -> "EnergyBudget":
        return EnergyBudget.create({node: hops + extra for node, hops in self.budget.items()})


class Classification(BaseModel):
    """Output of moving node selection"""
    active_moving: FrozenSet[NodeId]
    passive_moving: FrozenSet[NodeId]
    skeleton: TreeTopology

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_partition(self):
        if self.active_moving & self.passive_moving:
            raise ValueError('Active and passive moving sets overlap')
        if (self.active_moving | self.passive_moving) & self.skeleton.nodes:
            raise ValueError('Moving nodes must not be part of the skeleton')
        return self

    def moving(self) -> FrozenSet[NodeId]:
        return self.active_moving | self.passive_moving


class SearchResult(BaseModel):
    algorithm: Algorithm
    bound: Optional[BoundMode] = None
    final: LabeledTree
    traffic: float
    traffic_initial: float
    plan: ReconfigPlan
    classification: Classification
    nodes_explored: int = 0
    nodes_pruned: int = 0
    leaves_explored: int = 0
    wall_time_ms: float = 0.0

    class Config:
        frozen = True

    def summary(self) -> "SearchSummary":
        return SearchSummary(
            algorithm=self.algorithm.value,
            traffic_initial=self.traffic_initial,
            traffic_final=self.traffic,
            nodes_explored=self.nodes_explored,
            nodes_pruned=self.nodes_pruned,
            wall_time_ms=round(self.wall_time_ms, 3),
        )


class SearchSummary(BaseModel):
    """One-line export record of a search"""
    algorithm: str
    traffic_initial: float
    traffic_final: float
    nodes_explored: int
    nodes_pruned: int
    wall_time_ms: float
