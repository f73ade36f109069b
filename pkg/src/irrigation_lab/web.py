"""Node events, link events, and the web-building exploration.

The torus of cells is treated as an m x m grid of "nodes".  A node event
grows a bush from a seed vertex by a bounded-hop directed search confined
to one cell; it succeeds when every box of the cell holds enough bush
vertices.  A link event tries to reach the central box of an adjacent cell
from seed-box vertices within ceil(kd/2) hops confined to the target cell.
Vertices whose out-lists have been read become forbidden forever and are
excluded from all later events.

build_web chains these events in a lexicographic exploration over the grid
and records a partial site/link configuration that the percolation module
can complete into a full mixed configuration.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .components import components
from .irrigation import OffspringLaw, undirected_view
from .lattice import LatticeFrame, seed_and_central_boxes

__all__ = [
    "UNTESTED",
    "OPEN",
    "CLOSED",
    "ForbiddenSet",
    "NodeEvent",
    "LinkEvent",
    "PartialGridConfig",
    "WebResult",
    "default_node_threshold",
    "node_event",
    "link_event",
    "explore_grid",
    "build_web",
    "web_coverage",
    "hookup_fraction",
]

UNTESTED, OPEN, CLOSED = 0, 1, 2


class ForbiddenSet:
    """Monotone set of vertices whose random choices have been revealed.

    Membership is a flat boolean array; per-cell counts are maintained
    incrementally so the per-cell cap check is O(1) per cell.
    """

    def __init__(self, frame: LatticeFrame):
        self.frame = frame
        self.flags = np.zeros(frame.n, dtype=bool)
        self.cell_counts = np.zeros(frame.m * frame.m, dtype=np.int64)

    def add(self, vertices) -> None:
        idx = np.unique(np.atleast_1d(np.asarray(vertices, dtype=np.int64)))
        if idx.size == 0:
            return
        new = idx[~self.flags[idx]]
        if new.size == 0:
            return
        self.flags[new] = True
        self.cell_counts += np.bincount(
            self.frame.point_cell_id[new], minlength=self.cell_counts.size
        )

    def __contains__(self, vertex: int) -> bool:
        return bool(self.flags[vertex])

    def __len__(self) -> int:
        return int(np.count_nonzero(self.flags))

    def count_in_cell(self, cell: tuple[int, int]) -> int:
        return int(self.cell_counts[cell[0] * self.frame.m + cell[1]])

    @property
    def max_per_cell(self) -> int:
        return int(self.cell_counts.max())


def default_node_threshold(law: OffspringLaw, k: int) -> int:
    """ceil((E xi)^(k^2/2)), the analysis' per-box bush-count requirement."""
    return math.ceil(law.mean() ** (k * k / 2.0))


@dataclass(frozen=True)
class NodeEvent:
    """Outcome of one node event; iterates as (success, bush, forbidden)."""

    success: bool
    bush: np.ndarray
    forbidden: "ForbiddenSet"
    cell: tuple[int, int]

    def __iter__(self):
        return iter((self.success, self.bush, self.forbidden))


def node_event(
    g,
    frame: LatticeFrame,
    x: int,
    forbidden: ForbiddenSet,
    threshold: int,
    hops: int | None = None,
) -> NodeEvent:
    """Grow a bush from x inside its cell; succeed if every box holds enough.

    The bush is everything reachable from x within at most `hops` directed
    hops (default k^2) along paths whose every vertex lies inside x's cell
    and outside the forbidden set as of the event's start.  Every vertex
    whose out-list the search reads becomes forbidden afterwards.
    """
    x = int(x)
    if x in forbidden:
        raise ValueError(f"seed vertex {x} is forbidden")
    cell = (int(frame.point_cell[x, 0]), int(frame.point_cell[x, 1]))
    if tuple(frame.point_box[x]) != frame.central_box(cell):
        raise ValueError(f"seed vertex {x} is not in the central box of its cell")
    if hops is None:
        hops = frame.k * frame.k
    cell_id = cell[0] * frame.m + cell[1]
    in_cell = frame.point_cell_id
    flags = forbidden.flags
    visited = np.zeros(frame.n, dtype=bool)
    visited[x] = True
    frontier = [x]
    expanded: list[int] = []
    for _ in range(hops):
        if not frontier:
            break
        nxt: list[int] = []
        for u in frontier:
            expanded.append(u)
            for v in g.out_neighbors(u).tolist():
                if not visited[v] and in_cell[v] == cell_id and not flags[v]:
                    visited[v] = True
                    nxt.append(v)
        frontier = nxt
    bush = np.flatnonzero(visited)
    kd = frame.kd
    local = (frame.point_box[bush, 0] - cell[0] * kd) * kd + (
        frame.point_box[bush, 1] - cell[1] * kd
    )
    per_box = np.bincount(local, minlength=kd * kd)
    success = bool((per_box >= threshold).all())
    forbidden.add(expanded)
    return NodeEvent(success=success, bush=bush, forbidden=forbidden, cell=cell)


def _adjacent(u: tuple[int, int], v: tuple[int, int], m: int) -> bool:
    diff = ((v[0] - u[0]) % m, (v[1] - u[1]) % m)
    return diff in {(1, 0), (m - 1, 0), (0, 1), (0, m - 1)} and u != v


@dataclass(frozen=True)
class LinkEvent:
    """Outcome of one link event; iterates as (success, reached, forbidden).

    `reached` holds every central-box vertex the search entered,
    `distinguished` the lowest-index one (None on failure), and `visited`
    every qualifying vertex the search touched, seed points included.
    """

    success: bool
    reached: np.ndarray
    forbidden: "ForbiddenSet"
    distinguished: int | None
    visited: np.ndarray

    def __iter__(self):
        return iter((self.success, self.reached, self.forbidden))


def link_event(
    g,
    frame: LatticeFrame,
    R,
    source_cell: tuple[int, int],
    target_cell: tuple[int, int],
    forbidden: ForbiddenSet,
    hops: int | None = None,
    single_path: bool = False,
) -> LinkEvent:
    """Try to reach the target cell's central box from seed-box vertices R.

    R must lie in the seed box of `source_cell` facing `target_cell`.
    Qualifying paths leave R and stay inside the target cell, avoiding
    vertices forbidden as of the event's start; the central box is
    absorbing (a path stops on first entry, so reached vertices keep their
    choices unrevealed and can seed the next node event).  With
    single_path=True each seed vertex follows only its first choice
    (lowest-index out-neighbor) instead of branching — the weaker search
    the analytic lower bound is written for.
    """
    source_cell = (int(source_cell[0]), int(source_cell[1]))
    target_cell = (int(target_cell[0]), int(target_cell[1]))
    if not _adjacent(source_cell, target_cell, frame.m):
        raise ValueError(f"cells {source_cell} and {target_cell} are not adjacent")
    if hops is None:
        hops = (frame.kd + 1) // 2
    R = np.asarray(R, dtype=np.int64)
    if R.size:
        seed_box = seed_and_central_boxes(frame, source_cell).toward(target_cell)
        boxes = frame.point_box[R]
        if not ((boxes[:, 0] == seed_box[0]) & (boxes[:, 1] == seed_box[1])).all():
            raise ValueError("R must lie inside the seed box facing the target cell")
    flags = forbidden.flags
    eligible = R[~flags[R]] if R.size else R
    target_id = target_cell[0] * frame.m + target_cell[1]
    central = frame.central_box(target_cell)
    in_cell = frame.point_cell_id
    point_box = frame.point_box

    def is_central(v: int) -> bool:
        return point_box[v, 0] == central[0] and point_box[v, 1] == central[1]

    expanded: list[int] = []
    visited_list: list[int] = []
    reached: set[int] = set()
    if eligible.size:
        if single_path:
            for y in eligible.tolist():
                visited_list.append(y)
                expanded.append(y)
                cur = y
                for _ in range(hops):
                    nbrs = g.out_neighbors(cur)
                    if nbrs.size == 0:
                        break
                    nxt = int(nbrs[0])
                    if in_cell[nxt] != target_id or flags[nxt]:
                        break
                    visited_list.append(nxt)
                    if is_central(nxt):
                        reached.add(nxt)
                        break
                    expanded.append(nxt)
                    cur = nxt
                if reached:
                    break
        else:
            visited = np.zeros(frame.n, dtype=bool)
            visited[eligible] = True
            visited_list.extend(eligible.tolist())
            frontier = eligible.tolist()
            for _ in range(hops):
                if not frontier:
                    break
                nxt_frontier: list[int] = []
                for u in frontier:
                    expanded.append(u)
                    for v in g.out_neighbors(u).tolist():
                        if visited[v] or in_cell[v] != target_id or flags[v]:
                            continue
                        visited[v] = True
                        visited_list.append(v)
                        if is_central(v):
                            reached.add(v)
                        else:
                            nxt_frontier.append(v)
                frontier = nxt_frontier
    forbidden.add(expanded)
    reached_arr = np.array(sorted(reached), dtype=np.int64)
    return LinkEvent(
        success=bool(reached),
        reached=reached_arr,
        forbidden=forbidden,
        distinguished=int(reached_arr[0]) if reached else None,
        visited=np.unique(np.array(visited_list, dtype=np.int64)),
    )


class PartialGridConfig:
    """Tri-state site/link configuration on the m x m torus grid.

    Node and oriented-link states are UNTESTED/OPEN/CLOSED; a link's tested
    flag is simply "state != UNTESTED".  Unoriented link (axis, i, j)
    connects (i, j) to its +axis neighbor; orientation slot 0 points away
    from (i, j), slot 1 back toward it.  x_vertex holds each activated
    node's distinguished vertex (-1 before activation), assigned once.
    """

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("m must be at least 1")
        self.m = m
        self.node_state = np.full((m, m), UNTESTED, dtype=np.int8)
        self.link_state = np.full((2, m, m, 2), UNTESTED, dtype=np.int8)
        self.x_vertex = np.full((m, m), -1, dtype=np.int64)

    def _oriented_index(self, u, v) -> tuple[int, int, int, int]:
        m = self.m
        if not _adjacent(tuple(u), tuple(v), m):
            raise ValueError(f"cells {u} and {v} are not adjacent")
        diff = ((v[0] - u[0]) % m, (v[1] - u[1]) % m)
        if diff == (1, 0):
            return (0, u[0], u[1], 0)
        if diff == (m - 1, 0):
            return (0, v[0], v[1], 1)
        if diff == (0, 1):
            return (1, u[0], u[1], 0)
        return (1, v[0], v[1], 1)

    def node(self, u) -> int:
        return int(self.node_state[u[0], u[1]])

    def set_node(self, u, state: int) -> None:
        if self.node_state[u[0], u[1]] != UNTESTED:
            raise ValueError(f"node {tuple(u)} already tested")
        self.node_state[u[0], u[1]] = state

    def oriented(self, u, v) -> int:
        a, i, j, s = self._oriented_index(u, v)
        return int(self.link_state[a, i, j, s])

    def set_oriented(self, u, v, state: int) -> None:
        a, i, j, s = self._oriented_index(u, v)
        if self.link_state[a, i, j, s] != UNTESTED:
            raise ValueError(f"oriented link {tuple(u)}->{tuple(v)} already tested")
        self.link_state[a, i, j, s] = state

    def tested(self, u, v) -> bool:
        return self.oriented(u, v) != UNTESTED

    def x_at(self, u) -> int:
        return int(self.x_vertex[u[0], u[1]])

    def set_x(self, u, x: int) -> None:
        if self.x_vertex[u[0], u[1]] != -1:
            raise ValueError(f"node {tuple(u)} already has a distinguished vertex")
        self.x_vertex[u[0], u[1]] = x

    @property
    def fully_node_tested(self) -> bool:
        return bool((self.node_state != UNTESTED).all())

    def counts(self) -> dict[str, int]:
        return {
            "nodes_open": int(np.count_nonzero(self.node_state == OPEN)),
            "nodes_closed": int(np.count_nonzero(self.node_state == CLOSED)),
            "links_open": int(np.count_nonzero(self.link_state == OPEN)),
            "links_tested": int(np.count_nonzero(self.link_state != UNTESTED)),
        }


def _grid_neighbors(u: tuple[int, int], m: int) -> list[tuple[int, int]]:
    """Distinct torus neighbors of u, in lexicographic order."""
    i, j = u
    cand = {((i + 1) % m, j), ((i - 1) % m, j), (i, (j + 1) % m), (i, (j - 1) % m)}
    cand.discard(u)
    return sorted(cand)


def explore_grid(m: int, activate, node_test, link_test):
    """Lexicographic active/explored/unseen sweep over the m x m grid.

    activate(u) -> seed vertex or None (no eligible seed: node closed).
    node_test(u, x) -> bool.
    link_test(u, v) -> (success, distinguished vertex or None).

    While any node is active, the lexicographically lowest one is popped and
    its node event runs; on success, link events run toward each unseen
    neighbor in lexicographic order, activating targets they reach.  When no
    node is active, the lowest unseen node is activated directly.  Returns
    the PartialGridConfig and the event trace.
    """
    config = PartialGridConfig(m)
    active: list[tuple[int, int]] = []
    in_active: set[tuple[int, int]] = set()
    explored: set[tuple[int, int]] = set()
    unseen = {(i, j) for i in range(m) for j in range(m)}
    trace: list[tuple] = []
    while len(explored) < m * m:
        if active:
            u = heapq.heappop(active)
            in_active.discard(u)
            ok = bool(node_test(u, config.x_at(u)))
            trace.append(("node", u, ok))
            config.set_node(u, OPEN if ok else CLOSED)
            if ok:
                for v in _grid_neighbors(u, m):
                    if v not in unseen:
                        continue
                    success, x_v = link_test(u, v)
                    trace.append(("link", u, v, bool(success)))
                    config.set_oriented(u, v, OPEN if success else CLOSED)
                    if success:
                        config.set_x(v, int(x_v))
                        unseen.discard(v)
                        in_active.add(v)
                        heapq.heappush(active, v)
            explored.add(u)
        else:
            u = min(unseen)
            x_u = activate(u)
            trace.append(("activate", u, x_u))
            unseen.discard(u)
            if x_u is None:
                config.set_node(u, CLOSED)
                explored.add(u)
            else:
                config.set_x(u, int(x_u))
                in_active.add(u)
                heapq.heappush(active, u)
    return config, trace


@dataclass(frozen=True)
class WebResult:
    """Web vertex set with its configuration, forbidden set, and measurements."""

    web: np.ndarray
    config: PartialGridConfig
    forbidden: ForbiddenSet
    box_counts: np.ndarray
    threshold: int
    coverage: float
    nodes_open: int
    links_open: int
    no_seed_nodes: int
    seed: int
    trace: list = field(repr=False)
    bushes: dict = field(repr=False, default_factory=dict)

    @property
    def web_size(self) -> int:
        return int(self.web.size)


def build_web(
    g,
    frame: LatticeFrame,
    threshold: int | None = None,
    seed: int = 0,
    single_path_links: bool = False,
) -> WebResult:
    """Run the full exploration and assemble the web.

    The web is the union of all successful bushes and all vertices on
    successful link searches.  The exploration itself is deterministic
    given the digraph; `seed` is recorded for provenance only.  Seed points
    of a link event are the source bush's vertices in the facing seed box
    whose choices are still unrevealed.
    """
    if g.base_points is not frame.points:
        raise ValueError("digraph and frame must be built over the same points")
    if threshold is None:
        threshold = default_node_threshold(g.law, frame.k)
    forbidden = ForbiddenSet(frame)
    m = frame.m
    link_hops = (frame.kd + 1) // 2
    bushes: dict[tuple[int, int], np.ndarray] = {}
    web_chunks: list[np.ndarray] = []
    no_seed = 0

    def activate(u: tuple[int, int]) -> int | None:
        nonlocal no_seed
        central = frame.box_points(*frame.central_box(u))
        for v in central.tolist():
            if v not in forbidden:
                return v
        no_seed += 1
        return None

    def node_test(u: tuple[int, int], x: int) -> bool:
        ev = node_event(g, frame, x, forbidden, threshold)
        if ev.success:
            bushes[u] = ev.bush
            web_chunks.append(ev.bush)
        return ev.success

    def link_test(u: tuple[int, int], v: tuple[int, int]):
        seed_box = seed_and_central_boxes(frame, u).toward(v)
        bush = bushes[u]
        boxes = frame.point_box[bush]
        in_box = bush[(boxes[:, 0] == seed_box[0]) & (boxes[:, 1] == seed_box[1])]
        R = in_box[~forbidden.flags[in_box]]
        ev = link_event(
            g, frame, R, u, v, forbidden, hops=link_hops, single_path=single_path_links
        )
        if ev.success:
            web_chunks.append(ev.visited)
        return ev.success, ev.distinguished

    config, trace = explore_grid(m, activate, node_test, link_test)
    if web_chunks:
        web = np.unique(np.concatenate(web_chunks))
    else:
        web = np.array([], dtype=np.int64)
    b = frame.boxes_per_axis
    box_counts = np.bincount(frame.point_box_id[web], minlength=b * b).reshape(b, b)
    counts = config.counts()
    result = WebResult(
        web=web,
        config=config,
        forbidden=forbidden,
        box_counts=box_counts,
        threshold=int(threshold),
        coverage=float(np.mean(box_counts >= threshold)) if threshold > 0 else 1.0,
        nodes_open=counts["nodes_open"],
        links_open=counts["links_open"],
        no_seed_nodes=no_seed,
        seed=int(seed),
        trace=trace,
        bushes=bushes,
    )
    return result


def web_coverage(w: WebResult, threshold: int) -> float:
    """Fraction of all boxes holding at least `threshold` web vertices."""
    if threshold <= 0:
        return 1.0
    return float(np.mean(w.box_counts >= threshold))


def hookup_fraction(g, w: WebResult) -> float:
    """Fraction of vertices in the undirected component the web mostly lives in.

    Of the components of the full undirected graph, take the one containing
    the largest share of web vertices; return its size over n.
    """
    if w.web.size == 0:
        raise ValueError("web is empty")
    census = components(undirected_view(g))
    comp_of_web = census.component_id[w.web]
    roots, counts = np.unique(comp_of_web, return_counts=True)
    best_root = roots[np.argmax(counts)]
    return float(np.count_nonzero(census.component_id == best_root) / g.n)
