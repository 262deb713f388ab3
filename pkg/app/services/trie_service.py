"""
Prefix-label arithmetic on rooted trees.
Labels make every distance a comparison of two symbol sequences, so nothing
here walks the tree once the labels exist.
"""
from typing import Dict, Mapping, Optional, Union
import math
import logging
import numpy as np
import networkx as nx
from app.core.config import settings
from app.core.exceptions import InvalidParameterError, UnknownNodeError
from app.schemas.common import NodeId
from app.schemas.flow import FlowSet
from app.schemas.topology import Label, LabeledTree, PrefixLabel, TreeTopology

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, None]


def assign_prefix_labels(tree: TreeTopology, first_suffix: Optional[int] = None) -> LabeledTree:
    """Root gets (0,); children of every node get suffixes in ascending node-id order"""
    if first_suffix is None:
        first_suffix = settings.LABEL_FIRST_SUFFIX
    raw: Dict[NodeId, Label] = {tree.root: (0,)}
    for node in tree.bfs_order():
        for offset, child in enumerate(tree.children(node)):
            raw[child] = raw[node] + (first_suffix + offset,)
    return LabeledTree.create(tree, {node: PrefixLabel(symbols=label) for node, label in raw.items()})


def common_prefix_length(a: Union[PrefixLabel, Label], b: Union[PrefixLabel, Label]) -> int:
    a = a.symbols if isinstance(a, PrefixLabel) else a
    b = b.symbols if isinstance(b, PrefixLabel) else b
    length = 0
    for x, y in zip(a, b):
        if x != y:
            break
        length += 1
    return length


def label_distance(a: Label, b: Label) -> int:
    """Hop count between the owners of two labels in the same trie"""
    common = common_prefix_length(a, b)
    return (len(a) - common) + (len(b) - common)


def trie_distance(t: LabeledTree, u: NodeId, v: NodeId) -> int:
    return label_distance(t.raw(u), t.raw(v))


def next_hop(current: Label, target: Label) -> Optional[Label]:
    """
    Maximum prefix matching: step down toward target when current is a prefix
    of it, otherwise step up to the parent. None once current == target.
    """
    if current == target:
        return None
    if target[:len(current)] == current:
        return target[:len(current) + 1]
    return current[:-1]


def labeled_traffic(labels: Mapping[NodeId, Label], flows: FlowSet, partial: bool = False) -> float:
    """
    Sum of rate x hop distance over flows.
    With partial=True flows touching unlabeled nodes are skipped instead of rejected.
    """
    terms = []
    for (src, dst), rate in flows.items():
        if src not in labels or dst not in labels:
            if partial:
                continue
            missing = src if src not in labels else dst
            raise UnknownNodeError(f"Flow endpoint {missing} is not in the topology")
        if rate > 0:
            terms.append(rate * label_distance(labels[src], labels[dst]))
    return math.fsum(terms)


def aggregate_traffic(t: Union[TreeTopology, LabeledTree], f: FlowSet) -> float:
    """Aggregate traffic in Mbps x hops over the tree"""
    labeled = t if isinstance(t, LabeledTree) else assign_prefix_labels(t)
    return labeled_traffic(labeled.raw_labels(), f)


def random_tree(n: int, seed: SeedLike = None) -> TreeTopology:
    """Uniform labeled tree on nodes 0..n-1 from a random Pruefer sequence, rooted at 0"""
    if n < 1:
        raise InvalidParameterError(f"A tree needs at least one node, got n={n}")
    if n == 1:
        return TreeTopology.create(0, {}, {0})
    rng = np.random.default_rng(seed)
    sequence = rng.integers(0, n, size=n - 2).tolist()
    graph = nx.from_prufer_sequence(sequence)
    return TreeTopology.from_undirected(0, graph.edges(), range(n))
