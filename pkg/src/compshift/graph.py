"""Functional graphs of self-maps and their cycle/tree decomposition.

A self-map ``T`` on a finite label set induces the graph with edges
``(T x, x)``, so every vertex has exactly one incoming edge.  A connected
finite graph of this kind is one simple cycle with rooted directed trees
hanging off cycle vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

VertexId = str

ROOTLESS_TREE = "rootless-tree"
CYCLE_WITH_TREES = "cycle-with-trees"


class GraphError(ValueError):
    """Invalid self-map description; ``vertex`` names the offender."""

    def __init__(self, message: str, vertex: VertexId | None = None):
        super().__init__(message if vertex is None else f"{message}: {vertex!r}")
        self.vertex = vertex


@dataclass(frozen=True)
class FunctionalGraph:
    vertices: tuple[VertexId, ...]
    image: Mapping[VertexId, VertexId]
    _children: Mapping[VertexId, tuple[VertexId, ...]] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        kids: dict[VertexId, list[VertexId]] = {v: [] for v in self.vertices}
        for v in self.vertices:
            kids[self.image[v]].append(v)
        object.__setattr__(self, "_children", {v: tuple(sorted(c)) for v, c in kids.items()})
        # edges are (T x, x): the in-degree of x is one by construction
        assert sorted(x for c in kids.values() for x in c) == sorted(self.vertices)

    def children(self, v: VertexId) -> tuple[VertexId, ...]:
        """Vertices ``u`` with ``T u = v``, i.e. heads of edges leaving ``v``."""
        return self._children[v]

    def edges(self) -> list[tuple[VertexId, VertexId]]:
        return [(self.image[x], x) for x in self.vertices]

    def __len__(self) -> int:
        return len(self.vertices)

    def subgraph(self, keep: Iterable[VertexId]) -> "FunctionalGraph":
        keep = set(keep)
        verts = tuple(v for v in self.vertices if v in keep)
        for v in verts:
            if self.image[v] not in keep:
                raise GraphError("subgraph is not closed under the map", v)
        return FunctionalGraph(verts, {v: self.image[v] for v in verts})


@dataclass(frozen=True)
class TreePart:
    root: VertexId
    attachment: int
    members: tuple[VertexId, ...]


@dataclass(frozen=True)
class Classification:
    variant: str
    cycle: tuple[VertexId, ...] = ()
    trees: tuple[TreePart, ...] = ()

    @property
    def kappa(self) -> int:
        return len(self.cycle)

    def cycle_index(self, v: VertexId) -> int | None:
        try:
            return self.cycle.index(v)
        except ValueError:
            return None

    def trees_at(self, i: int) -> list[TreePart]:
        return [t for t in self.trees if t.attachment == i]

    def tree_of(self, v: VertexId) -> TreePart | None:
        for t in self.trees:
            if v in t.members:
                return t
        return None


def validate(vertex_list: Sequence[VertexId], image_map: Mapping[VertexId, VertexId]) -> FunctionalGraph:
    seen: set[VertexId] = set()
    for v in vertex_list:
        if not isinstance(v, str) or not v or any(ch.isspace() for ch in v):
            raise GraphError("labels must be non-empty strings without whitespace", v)
        if v in seen:
            raise GraphError("duplicate label", v)
        seen.add(v)
    for v in vertex_list:
        if v not in image_map:
            raise GraphError("missing image", v)
        if image_map[v] not in seen:
            raise GraphError("image outside vertex set", v)
    for v in image_map:
        if v not in seen:
            raise GraphError("map entry for unknown vertex", v)
    return FunctionalGraph(tuple(vertex_list), {v: image_map[v] for v in vertex_list})


def connected_components(g: FunctionalGraph) -> list[FunctionalGraph]:
    """Weakly connected components, in order of first appearance."""
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v in g.vertices:
        a, b = find(v), find(g.image[v])
        if a != b:
            parent[a] = b
    groups: dict[VertexId, list[VertexId]] = {}
    for v in g.vertices:
        groups.setdefault(find(v), []).append(v)
    return [g.subgraph(vs) for vs in groups.values()]


def find_cycle(g: FunctionalGraph, start: VertexId | None = None) -> list[VertexId]:
    """Iterate ``T`` from ``start`` until a repeat; return the periodic part."""
    v = g.vertices[0] if start is None else start
    pos: dict[VertexId, int] = {}
    walk: list[VertexId] = []
    while v not in pos:
        pos[v] = len(walk)
        walk.append(v)
        v = g.image[v]
    return walk[pos[v]:]


def classify(g: FunctionalGraph) -> Classification:
    if len(connected_components(g)) != 1:
        raise GraphError("classify needs a connected graph; decompose into components first")
    forward = find_cycle(g)
    cycle_set = set(forward)
    v0 = min(forward)
    # T v_{j+1} = v_j, so the cycle order is the forward T-walk reversed
    k = len(forward)
    walk = [v0]
    for _ in range(k - 1):
        walk.append(g.image[walk[-1]])
    cycle = tuple([walk[0]] + walk[:0:-1])
    trees = []
    for i, c in enumerate(cycle):
        for root in g.children(c):
            if root in cycle_set:
                continue
            trees.append(TreePart(root, i, tuple(_bfs(g, root))))
    return Classification(CYCLE_WITH_TREES, cycle, tuple(trees))


def _bfs(g: FunctionalGraph, root: VertexId) -> list[VertexId]:
    order = []
    queue = deque([root])
    while queue:
        v = queue.popleft()
        order.append(v)
        queue.extend(g.children(v))
    return order


def tree_order(c: Classification, root: VertexId) -> list[VertexId]:
    """Breadth-first members of the tree rooted at ``root``; parents first."""
    for t in c.trees:
        if t.root == root:
            return list(t.members)
    raise GraphError("not a tree root of this classification", root)
