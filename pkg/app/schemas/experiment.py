from pydantic import BaseModel, Field
from typing import Optional


class InstanceSpec(BaseModel):
    """Parameters of one random instance"""
    n: int = Field(..., ge=3, description="Node count")
    total_flow: float = Field(1.0, gt=0, description="Total flow in Mbps")
    h_max: int = Field(..., ge=0, description="Largest hop budget drawn")
    seed: int = Field(..., ge=0)

    class Config:
        frozen = True


class TrialResult(BaseModel):
    """One (trial, algorithm) row of an experiment"""
    spec: InstanceSpec
    algorithm: str
    roots_considered: int = 1
    traffic_initial: float
    traffic_final: float
    explored: int = 0
    pruned: int = 0
    wall_time_ms: Optional[float] = None

    class Config:
        frozen = True


class CellSummary(BaseModel):
    """Mean over the trials of one (n, h_max, algorithm, roots) cell"""
    n: int
    h_max: int
    algorithm: str
    roots_considered: int
    trials: int
    mean_traffic_initial: float
    mean_traffic_final: float
    std_traffic_final: float
    mean_explored: float


class ComplexityRow(BaseModel):
    """Operation counters on the all-movers worst-case instance"""
    n: int
    greedy_evaluations: int
    greedy_worst_case: int
    bnb_leaves: Optional[int] = None
    bnb_explored: Optional[int] = None
    oracle_leaves: Optional[int] = None
    optimal_worst_case: int
