from pydantic import BaseModel, Field, field_validator
from typing import Dict, FrozenSet, Iterable, List, Tuple
import math
from app.core.exceptions import InvalidFlowError
from app.schemas.common import NodeId, build_model

Pair = Tuple[NodeId, NodeId]


class FlowEntry(BaseModel):
    """One directed traffic demand as it appears in a flow file"""
    src: NodeId
    dst: NodeId
    mbps: float = Field(..., description="Rate in Mbps")


class FlowSet(BaseModel):
    """Directed traffic demands f_(u,v) in Mbps; absent pairs mean rate 0"""
    rates: Dict[Pair, float] = Field(default_factory=dict)

    class Config:
        frozen = True

    @field_validator('rates')
    def validate_rates(cls, v):
        for (src, dst), rate in v.items():
            if src == dst:
                raise ValueError(f'Flow from node {src} to itself is not allowed')
            if not math.isfinite(rate) or rate < 0:
                raise ValueError(f'Flow {src}->{dst} has invalid rate {rate}')
        return v

    @classmethod
    def create(cls, rates: Dict[Pair, float]) -> "FlowSet":
        return build_model(cls, InvalidFlowError, rates=dict(rates))

    @classmethod
    def from_entries(cls, entries: Iterable[FlowEntry]) -> "FlowSet":
        rates: Dict[Pair, float] = {}
        for entry in entries:
            pair = (entry.src, entry.dst)
            if pair in rates:
                raise InvalidFlowError(f"Duplicate flow {entry.src}->{entry.dst}")
            rates[pair] = entry.mbps
        return cls.create(rates)

    def items(self) -> List[Tuple[Pair, float]]:
        """Pairs in sorted order, so sums are reproducible"""
        return sorted(self.rates.items())

    def rate(self, src: NodeId, dst: NodeId) -> float:
        return self.rates.get((src, dst), 0.0)

    def total(self) -> float:
        return math.fsum(self.rates.values())

    def endpoints(self) -> FrozenSet[NodeId]:
        return frozenset(node for pair in self.rates for node in pair)

    def has_flow(self, node: NodeId) -> bool:
        """CheckFlow: some nonzero in- or out-flow"""
        return any(rate > 0 and node in pair for pair, rate in self.rates.items())

    def pair_weights(self) -> Dict[NodeId, Dict[NodeId, float]]:
        """Symmetric weights f_uv + f_vu keyed both ways, zero pairs dropped"""
        weights: Dict[NodeId, Dict[NodeId, float]] = {}
        for (src, dst), rate in self.items():
            if rate <= 0:
                continue
            weights.setdefault(src, {})
            weights.setdefault(dst, {})
            weights[src][dst] = weights[src].get(dst, 0.0) + rate
            weights[dst][src] = weights[dst].get(src, 0.0) + rate
        return weights

    def scaled(self, factor: float) -> "FlowSet":
        return FlowSet.create({pair: rate * factor for pair, rate in self.rates.items()})

    def __len__(self) -> int:
        return len(self.rates)
