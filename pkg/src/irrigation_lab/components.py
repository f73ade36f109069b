"""Connected components, component census, and functional-graph statistics.

The census runs on the undirected view; the functional-path and mapping
operations target digraphs where every out-list has at most one entry (the
request-one regime), whose components are either trees or a unique cycle
with pendant trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .irrigation import IrrigationDigraph, UndirectedGraph

__all__ = [
    "UnionFind",
    "ComponentCensus",
    "MappingCensus",
    "components",
    "functional_paths",
    "mapping_census",
    "census_row",
]


class UnionFind:
    """Disjoint sets with path compression and union by size.

    Ties go to the smaller root id, so root ids (and hence component ids)
    are reproducible regardless of union order details.
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        sa, sb = self.size[ra], self.size[rb]
        if sa < sb or (sa == sb and rb < ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] = sa + sb
        return ra


@dataclass(frozen=True)
class ComponentCensus:
    """Partition summary: per-vertex component id and size statistics."""

    n: int
    component_id: np.ndarray
    sizes: np.ndarray  # sorted descending
    edge_count: int

    @property
    def component_count(self) -> int:
        return int(self.sizes.size)

    @property
    def c1(self) -> int:
        return int(self.sizes[0]) if self.sizes.size else 0

    @property
    def c2(self) -> int:
        return int(self.sizes[1]) if self.sizes.size > 1 else 0


def components(adj: UndirectedGraph) -> ComponentCensus:
    """Exact connected components of the undirected graph via union-find."""
    n = adj.n
    uf = UnionFind(n)
    union = uf.union
    for u, v in zip(adj.edges[:, 0].tolist(), adj.edges[:, 1].tolist()):
        union(u, v)
    find = uf.find
    comp = np.fromiter((find(v) for v in range(n)), dtype=np.int64, count=n)
    sizes = np.bincount(comp, minlength=n)
    sizes = np.sort(sizes[sizes > 0])[::-1]
    return ComponentCensus(n=n, component_id=comp, sizes=sizes, edge_count=adj.edge_count)


def census_row(census: ComponentCensus) -> dict[str, object]:
    """Flat summary row: n, edges, C1, C2, components, C1_frac."""
    return {
        "n": census.n,
        "edges": census.edge_count,
        "C1": census.c1,
        "C2": census.c2,
        "components": census.component_count,
        "C1_frac": census.c1 / census.n,
    }


def functional_paths(g: IrrigationDigraph) -> tuple[np.ndarray, int]:
    """Length of the maximal distinct-vertex walk from every start.

    From each start, repeatedly step to the first (lowest-index) out-neighbor
    and stop when the walk would revisit a vertex or hits an empty out-list.
    Lengths count distinct vertices visited (the start included).
    """
    n = g.n
    first = np.full(n, -1, dtype=np.int64)
    nonempty = np.flatnonzero(g.out_degrees > 0)
    first[nonempty] = g.out_indices[g.out_indptr[nonempty]]
    lengths = np.zeros(n, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        count = 0
        v = start
        while v >= 0 and stamp[v] != start:
            stamp[v] = start
            count += 1
            v = first[v]
        lengths[start] = count
    return lengths, int(lengths.max()) if n else 0


@dataclass(frozen=True)
class MappingCensus:
    """Per-component structure of a functional (out-degree <= 1) digraph."""

    n: int
    component_sizes: np.ndarray
    component_has_cycle: np.ndarray
    component_cyclic_counts: np.ndarray
    is_cyclic_vertex: np.ndarray

    @property
    def cycle_count(self) -> int:
        return int(self.component_has_cycle.sum())

    @property
    def cyclic_vertex_count(self) -> int:
        return int(self.is_cyclic_vertex.sum())

    @property
    def tree_sizes(self) -> np.ndarray:
        return self.component_sizes[~self.component_has_cycle]


def mapping_census(g: IrrigationDigraph) -> MappingCensus:
    """Cycle/tree census for digraphs with |out(u)| <= 1 everywhere."""
    n = g.n
    degs = g.out_degrees
    if np.any(degs > 1):
        bad = int(np.flatnonzero(degs > 1)[0])
        raise ValueError(f"vertex {bad} has out-degree {int(degs[bad])} > 1")
    first = np.full(n, -1, dtype=np.int64)
    nonempty = np.flatnonzero(degs > 0)
    first[nonempty] = g.out_indices[g.out_indptr[nonempty]]

    # Color walk: find all vertices lying on a cycle.
    state = np.zeros(n, dtype=np.int8)  # 0 new, 1 on current walk, 2 settled
    is_cyclic = np.zeros(n, dtype=bool)
    for start in range(n):
        if state[start]:
            continue
        walk = []
        v = start
        while v >= 0 and state[v] == 0:
            state[v] = 1
            walk.append(v)
            v = first[v]
        if v >= 0 and state[v] == 1:
            # Closed a loop within the current walk; mark the cycle part.
            at = walk.index(v)
            for u in walk[at:]:
                is_cyclic[u] = True
        for u in walk:
            state[u] = 2

    uf = UnionFind(n)
    for u in nonempty.tolist():
        uf.union(u, int(first[u]))
    roots = np.fromiter((uf.find(v) for v in range(n)), dtype=np.int64, count=n)
    labels, comp_of = np.unique(roots, return_inverse=True)
    sizes = np.bincount(comp_of, minlength=labels.size)
    cyc_counts = np.bincount(comp_of, weights=is_cyclic.astype(np.float64), minlength=labels.size)
    cyc_counts = cyc_counts.astype(np.int64)
    return MappingCensus(
        n=n,
        component_sizes=sizes,
        component_has_cycle=cyc_counts > 0,
        component_cyclic_counts=cyc_counts,
        is_cyclic_vertex=is_cyclic,
    )
