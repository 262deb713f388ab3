from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
from collections import deque
from app.core.exceptions import InvalidTopologyError, UnknownNodeError
from app.schemas.common import NodeId, build_model

# Raw label form used on hot paths; PrefixLabel wraps it at the edges
Label = Tuple[int, ...]


class PrefixLabel(BaseModel):
    """Per-level symbol sequence serving as a node's network address"""
    symbols: Tuple[int, ...]

    class Config:
        frozen = True

    @field_validator('symbols')
    def validate_symbols(cls, v):
        if len(v) == 0:
            raise ValueError('Prefix label must contain at least one symbol')
        if any(symbol < 0 for symbol in v):
            raise ValueError('Prefix label symbols must be non-negative')
        return v

    @classmethod
    def of(cls, *symbols: int) -> "PrefixLabel":
        return cls(symbols=tuple(symbols))

    @classmethod
    def parse(cls, text: str) -> "PrefixLabel":
        """Parse the dot-separated rendering, e.g. "0.2.2.1" """
        try:
            return cls(symbols=tuple(int(part) for part in text.strip().split(".")))
        except ValueError as exc:
            raise InvalidTopologyError(f"Malformed prefix label '{text}'") from exc

    def render(self) -> str:
        return ".".join(str(symbol) for symbol in self.symbols)

    def __str__(self) -> str:
        return self.render()

    def __len__(self) -> int:
        return len(self.symbols)

    def parent(self) -> Optional["PrefixLabel"]:
        if len(self.symbols) == 1:
            return None
        return PrefixLabel(symbols=self.symbols[:-1])

    def is_prefix_of(self, other: "PrefixLabel") -> bool:
        return other.symbols[:len(self.symbols)] == self.symbols


class TreeTopology(BaseModel):
    """Rooted tree given by child -> parent links; the root has no entry"""
    root: NodeId
    nodes: FrozenSet[NodeId]
    parent: Dict[NodeId, NodeId] = Field(default_factory=dict)

    _children: Dict[NodeId, Tuple[NodeId, ...]] = PrivateAttr(default_factory=dict)
    _depth: Dict[NodeId, int] = PrivateAttr(default_factory=dict)
    _bfs: Tuple[NodeId, ...] = PrivateAttr(default=())

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_tree(self):
        if self.root not in self.nodes:
            raise ValueError(f'Root {self.root} is not one of the nodes')
        if self.root in self.parent:
            raise ValueError(f'Root {self.root} must not have a parent')
        expected = self.nodes - {self.root}
        missing = sorted(expected - set(self.parent))
        if missing:
            raise ValueError(f'Nodes without parent: {missing}')
        unknown = sorted((set(self.parent) | set(self.parent.values())) - self.nodes)
        if unknown:
            raise ValueError(f'Links reference unknown nodes: {unknown}')
        for child, parent in self.parent.items():
            if child == parent:
                raise ValueError(f'Node {child} is its own parent')
        # every node must reach the root; a cycle would revisit a node first
        reached = {self.root}
        for start in self.nodes:
            walk = []
            node = start
            while node not in reached:
                if node in walk:
                    raise ValueError(f'Cycle through node {node}')
                walk.append(node)
                node = self.parent[node]
            reached.update(walk)
        return self

    def model_post_init(self, __context) -> None:
        # tolerant of malformed links: the tree validator reports those
        children: Dict[NodeId, List[NodeId]] = {node: [] for node in self.nodes}
        for child, parent in self.parent.items():
            children.setdefault(parent, []).append(child)
        self._children = {node: tuple(sorted(kids)) for node, kids in children.items()}
        order = [self.root]
        depth = {self.root: 0}
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            for child in self._children.get(node, ()):
                if child in depth:
                    continue
                depth[child] = depth[node] + 1
                order.append(child)
                queue.append(child)
        self._depth = depth
        self._bfs = tuple(order)

    @classmethod
    def create(cls, root: NodeId, parent: Dict[NodeId, NodeId], nodes: Optional[Iterable[NodeId]] = None) -> "TreeTopology":
        """Build a topology, raising InvalidTopologyError instead of a pydantic error"""
        if nodes is None:
            nodes = {root} | set(parent) | set(parent.values())
        return build_model(cls, InvalidTopologyError, root=root, parent=dict(parent), nodes=frozenset(nodes))

    @classmethod
    def from_edges(cls, root: NodeId, edges: Iterable[Sequence[NodeId]], nodes: Optional[Iterable[NodeId]] = None) -> "TreeTopology":
        """Build from (parent, child) pairs"""
        parent: Dict[NodeId, NodeId] = {}
        for edge in edges:
            if len(edge) != 2:
                raise InvalidTopologyError(f"Edge {list(edge)} must have exactly two endpoints")
            up, down = edge
            if down in parent:
                raise InvalidTopologyError(f"Node {down} has more than one parent")
            parent[down] = up
        return cls.create(root, parent, nodes)

    @classmethod
    def from_undirected(cls, root: NodeId, edges: Iterable[Sequence[NodeId]], nodes: Iterable[NodeId]) -> "TreeTopology":
        """Orient an undirected tree away from the given root"""
        nodes = set(nodes)
        adjacency: Dict[NodeId, List[NodeId]] = {node: [] for node in nodes}
        edge_count = 0
        for a, b in edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
            edge_count += 1
        if edge_count != len(nodes) - 1:
            raise InvalidTopologyError(f"A tree on {len(nodes)} nodes needs {len(nodes) - 1} edges, got {edge_count}")
        parent: Dict[NodeId, NodeId] = {}
        seen = {root}
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for neighbor in sorted(adjacency[node]):
                if neighbor not in seen:
                    seen.add(neighbor)
                    parent[neighbor] = node
                    queue.append(neighbor)
        return cls.create(root, parent, nodes)

    def require(self, node: NodeId) -> None:
        if node not in self.nodes:
            raise UnknownNodeError(f"Unknown node identifier {node}")

    def parent_of(self, node: NodeId) -> Optional[NodeId]:
        self.require(node)
        return self.parent.get(node)

    def children(self, node: NodeId) -> Tuple[NodeId, ...]:
        self.require(node)
        return self._children[node]

    def depth(self, node: NodeId) -> int:
        self.require(node)
        return self._depth[node]

    def bfs_order(self) -> Tuple[NodeId, ...]:
        return self._bfs

    def ancestors(self, node: NodeId) -> List[NodeId]:
        """Nodes on the way up to the root, nearest first"""
        self.require(node)
        chain = []
        while node in self.parent:
            node = self.parent[node]
            chain.append(node)
        return chain

    def descendants(self, node: NodeId) -> List[NodeId]:
        """All nodes below node, breadth-first"""
        self.require(node)
        found = []
        queue = deque(self._children[node])
        while queue:
            current = queue.popleft()
            found.append(current)
            queue.extend(self._children[current])
        return found

    def edges(self) -> List[Tuple[NodeId, NodeId]]:
        """(parent, child) pairs in breadth-first order"""
        return [(self.parent[node], node) for node in self._bfs[1:]]

    def reroot(self, new_root: NodeId) -> "TreeTopology":
        self.require(new_root)
        return TreeTopology.from_undirected(new_root, self.edges(), self.nodes)

    def induced(self, keep: Iterable[NodeId]) -> "TreeTopology":
        """Sub-topology on keep; keep must contain the root and be closed under parents"""
        keep = set(keep)
        parent = {child: up for child, up in self.parent.items() if child in keep and up in keep}
        return TreeTopology.create(self.root, parent, keep)

    def __len__(self) -> int:
        return len(self.nodes)


class LabeledTree(BaseModel):
    """Rooted tree plus the node <-> prefix label bijection (a trie)"""
    topology: TreeTopology
    labels: Dict[NodeId, PrefixLabel]

    _by_label: Dict[Label, NodeId] = PrivateAttr(default_factory=dict)

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_labels(self):
        if set(self.labels) != set(self.topology.nodes):
            raise ValueError('Labels must cover exactly the topology nodes')
        root_label = self.labels[self.topology.root]
        if len(root_label) != 1:
            raise ValueError(f'Root label {root_label} must have exactly one symbol')
        seen: Dict[Label, NodeId] = {}
        for node, label in self.labels.items():
            if label.symbols in seen:
                raise ValueError(f'Nodes {seen[label.symbols]} and {node} share label {label}')
            seen[label.symbols] = node
            up = self.topology.parent.get(node)
            if up is not None and self.labels[up].symbols != label.symbols[:-1]:
                raise ValueError(f'Label {label} of node {node} does not extend parent label {self.labels[up]}')
        return self

    def model_post_init(self, __context) -> None:
        self._by_label = {label.symbols: node for node, label in self.labels.items()}

    @classmethod
    def create(cls, topology: TreeTopology, labels: Dict[NodeId, PrefixLabel]) -> "LabeledTree":
        return build_model(cls, InvalidTopologyError, topology=topology, labels=labels)

    @property
    def root(self) -> NodeId:
        return self.topology.root

    @property
    def nodes(self) -> FrozenSet[NodeId]:
        return self.topology.nodes

    def label(self, node: NodeId) -> PrefixLabel:
        if node not in self.labels:
            raise UnknownNodeError(f"Unknown node identifier {node}")
        return self.labels[node]

    def raw(self, node: NodeId) -> Label:
        return self.label(node).symbols

    def raw_labels(self) -> Dict[NodeId, Label]:
        return {node: label.symbols for node, label in self.labels.items()}

    def node_for(self, label: PrefixLabel) -> Optional[NodeId]:
        return self._by_label.get(label.symbols)

    def rendered(self) -> Dict[NodeId, str]:
        return {node: label.render() for node, label in sorted(self.labels.items())}
