"""Node events, link events, the grid exploration, and full web builds.

Hand-built scenarios use a 3x3-cell frame (r=0.3, k=3, d=1, box side 1/9)
with points pinned to box centers, so every search step is predictable.
"""

import numpy as np
import pytest

import irrigation_lab.web as web_mod
from irrigation_lab.geometry import GridIndex, TorusPoints, sample_points
from irrigation_lab.irrigation import IrrigationDigraph, parse_law, sample_irrigation
from irrigation_lab.lattice import LatticeFrame
from irrigation_lab.web import (
    CLOSED,
    OPEN,
    UNTESTED,
    ForbiddenSet,
    PartialGridConfig,
    build_web,
    default_node_threshold,
    explore_grid,
    hookup_fraction,
    link_event,
    node_event,
    web_coverage,
)


def box_center(bx, by):
    return [(bx + 0.5) / 9.0, (by + 0.5) / 9.0]


def hand_frame(extra=()):
    """Points p0..p8 fill the boxes of cell (1,1) in raster order; p4 is central.

    `extra` appends more (bx, by) box centers after index 8.
    """
    boxes = [(3 + i // 3, 3 + i % 3) for i in range(9)]
    boxes.extend(extra)
    pts = TorusPoints.from_coords([box_center(bx, by) for bx, by in boxes])
    return pts, LatticeFrame(pts, 0.3, 3, 1)


class TestForbiddenSet:
    def test_counts_per_cell_and_idempotent_adds(self):
        pts, frame = hand_frame(extra=[(3, 6)])
        forb = ForbiddenSet(frame)
        assert len(forb) == 0
        forb.add([0, 1, 1, 9])
        assert len(forb) == 3
        assert 1 in forb and 2 not in forb
        assert forb.count_in_cell((1, 1)) == 2
        assert forb.count_in_cell((1, 2)) == 1
        forb.add([0])
        assert forb.count_in_cell((1, 1)) == 2
        assert forb.max_per_cell == 2


class TestNodeEvent:
    def digraph(self, n=9, overrides=None):
        out = {4: [1, 7], 1: [0, 2], 7: [6, 8], 0: [3], 2: [5]}
        if overrides:
            out.update(overrides)
        return IrrigationDigraph.from_out_lists([out.get(i, []) for i in range(n)])

    def test_full_bush_fills_the_cell(self):
        pts, frame = hand_frame()
        g = self.digraph()
        ev = node_event(g, frame, 4, ForbiddenSet(frame), threshold=1)
        assert ev.success
        assert ev.bush.tolist() == list(range(9))
        assert ev.cell == (1, 1)
        # Everything was expanded, so everything is now forbidden.
        assert len(ev.forbidden) == 9

    def test_threshold_above_box_occupancy_fails(self):
        pts, frame = hand_frame()
        ev = node_event(self.digraph(), frame, 4, ForbiddenSet(frame), threshold=2)
        assert not ev.success
        assert ev.bush.size == 9  # the bush itself is unchanged

    def test_preforbidden_vertices_block_their_subtrees(self):
        pts, frame = hand_frame()
        forb = ForbiddenSet(frame)
        forb.add([1])
        ev = node_event(self.digraph(), frame, 4, forb, threshold=1)
        assert not ev.success
        assert ev.bush.tolist() == [4, 6, 7, 8]

    def test_out_of_cell_neighbors_are_ignored(self):
        pts, frame = hand_frame(extra=[(3, 6)])  # p9 in cell (1, 2)
        g = self.digraph(n=10, overrides={4: [1, 7, 9]})
        ev = node_event(g, frame, 4, ForbiddenSet(frame), threshold=1)
        assert ev.success
        assert 9 not in ev.bush
        assert 9 not in ev.forbidden

    def test_hop_budget_limits_depth_and_expansion(self):
        pts, frame = hand_frame()
        forb = ForbiddenSet(frame)
        ev = node_event(self.digraph(), frame, 4, forb, threshold=1, hops=1)
        assert ev.bush.tolist() == [1, 4, 7]
        assert not ev.success
        # Only the root's out-list was read within one hop.
        assert forb.flags.tolist() == [False] * 4 + [True] + [False] * 4

    def test_seed_validation(self):
        pts, frame = hand_frame()
        g = self.digraph()
        forb = ForbiddenSet(frame)
        with pytest.raises(ValueError, match="not in the central box"):
            node_event(g, frame, 0, forb, threshold=1)
        forb.add([4])
        with pytest.raises(ValueError, match="forbidden"):
            node_event(g, frame, 4, forb, threshold=1)

    def test_matches_reference_search_on_random_digraphs(self):
        pts, frame = hand_frame(extra=[(3, 6), (6, 3)])  # two out-of-cell targets
        rng = np.random.default_rng(5)
        cell_of = frame.point_cell_id
        for _ in range(60):
            out_lists = [
                sorted(rng.choice(11, size=rng.integers(0, 4), replace=False).tolist())
                for _ in range(11)
            ]
            out_lists = [[v for v in lst if v != u] for u, lst in enumerate(out_lists)]
            g = IrrigationDigraph.from_out_lists(out_lists)
            pre = rng.choice([0, 1, 2, 3, 5, 6, 7, 8], size=rng.integers(0, 3), replace=False)
            hops = int(rng.integers(1, 5))
            threshold = int(rng.integers(1, 3))
            forb = ForbiddenSet(frame)
            forb.add(pre)

            # Independent reference: dict/set BFS over the same definition.
            blocked = set(pre.tolist())
            visited = {4}
            frontier = [4]
            expanded = set()
            for _ in range(hops):
                nxt = []
                for u in frontier:
                    expanded.add(u)
                    for v in out_lists[u]:
                        if v not in visited and cell_of[v] == cell_of[4] and v not in blocked:
                            visited.add(v)
                            nxt.append(v)
                frontier = nxt
            boxes = {tuple(frame.point_box[v]) for v in range(9)}
            per_box = {
                b: sum(1 for v in visited if tuple(frame.point_box[v]) == b) for b in boxes
            }
            want_success = all(c >= threshold for c in per_box.values())

            ev = node_event(g, frame, 4, forb, threshold=threshold, hops=hops)
            assert set(ev.bush.tolist()) == visited
            assert ev.success == want_success
            assert set(np.flatnonzero(forb.flags).tolist()) == blocked | expanded


class TestLinkEvent:
    def setup_scenario(self, p5_out=None, q_chain=True):
        """Cell (1,1) -> (1,2): seed box (4,5) holds p5; target central is (4,7)."""
        extra = [(3, 6), (4, 6), (4, 7), (4, 8)]  # p9 interior, q10 interior, q11 central, q12
        pts, frame = hand_frame(extra=extra)
        out = {5: p5_out if p5_out is not None else [10]}
        if q_chain:
            out[10] = [11]
            out[11] = [12]  # must never be read: the central box absorbs
        g = IrrigationDigraph.from_out_lists([out.get(i, []) for i in range(13)])
        return pts, frame, g

    def test_reaches_central_box_and_keeps_it_unrevealed(self):
        pts, frame, g = self.setup_scenario()
        forb = ForbiddenSet(frame)
        ev = link_event(g, frame, [5], (1, 1), (1, 2), forb)
        assert ev.success
        assert ev.reached.tolist() == [11]
        assert ev.distinguished == 11
        assert ev.visited.tolist() == [5, 10, 11]
        # The absorbing boundary: 11's choices stay hidden, the path is burned.
        assert 5 in forb and 10 in forb
        assert 11 not in forb and 12 not in forb

    def test_hop_budget_blocks_long_paths(self):
        pts, frame, g = self.setup_scenario()
        ev = link_event(g, frame, [5], (1, 1), (1, 2), ForbiddenSet(frame), hops=1)
        assert not ev.success
        assert ev.distinguished is None

    def test_forbidden_seeds_are_ineligible(self):
        pts, frame, g = self.setup_scenario()
        forb = ForbiddenSet(frame)
        forb.add([5])
        ev = link_event(g, frame, [5], (1, 1), (1, 2), forb)
        assert not ev.success
        assert ev.visited.size == 0
        assert len(forb) == 1  # nothing new was revealed

    def test_paths_must_stay_inside_the_target_cell(self):
        # p5's neighbor p1 lives in the source cell: not a qualifying path.
        pts, frame, g = self.setup_scenario(p5_out=[1])
        ev = link_event(g, frame, [5], (1, 1), (1, 2), ForbiddenSet(frame))
        assert not ev.success
        assert 1 not in ev.forbidden

    def test_single_path_mode_follows_only_the_first_choice(self):
        # Lowest out-neighbor 9 dead-ends; branching search would still win
        # through 10, the single-path variant must fail.
        pts, frame, g = self.setup_scenario(p5_out=[9, 10])
        ok_bfs = link_event(g, frame, [5], (1, 1), (1, 2), ForbiddenSet(frame))
        assert ok_bfs.success
        weak = link_event(
            g, frame, [5], (1, 1), (1, 2), ForbiddenSet(frame), single_path=True
        )
        assert not weak.success

    def test_seed_box_membership_is_checked(self):
        pts, frame, g = self.setup_scenario()
        with pytest.raises(ValueError, match="seed box"):
            link_event(g, frame, [4], (1, 1), (1, 2), ForbiddenSet(frame))
        with pytest.raises(ValueError, match="not adjacent"):
            link_event(g, frame, [5], (1, 1), (2, 2), ForbiddenSet(frame))

    def test_distinguished_is_the_lowest_reached(self):
        # Two central-box vertices reachable in one hop each.
        extra = [(4, 6), (4, 7), (4, 7)]  # q9 interior, q10 and q11 central
        pts, frame = hand_frame(extra=extra)
        g = IrrigationDigraph.from_out_lists(
            [[] for _ in range(5)] + [[9]] + [[] for _ in range(3)] + [[10, 11]] + [[], []]
        )
        ev = link_event(g, frame, [5], (1, 1), (1, 2), ForbiddenSet(frame))
        assert ev.success
        assert ev.reached.tolist() == [10, 11]
        assert ev.distinguished == 10


class TestPartialGridConfig:
    def test_oriented_slots_round_trip_with_wrap(self):
        pg = PartialGridConfig(3)
        pg.set_oriented((0, 0), (1, 0), OPEN)
        pg.set_oriented((1, 0), (0, 0), CLOSED)
        assert pg.oriented((0, 0), (1, 0)) == OPEN
        assert pg.oriented((1, 0), (0, 0)) == CLOSED
        assert pg.tested((0, 0), (1, 0))
        pg.set_oriented((2, 1), (0, 1), OPEN)  # wraps in +x
        assert pg.oriented((2, 1), (0, 1)) == OPEN
        assert not pg.tested((0, 1), (1, 1))

    def test_single_assignment_rules(self):
        pg = PartialGridConfig(2)
        pg.set_node((0, 0), OPEN)
        with pytest.raises(ValueError, match="already tested"):
            pg.set_node((0, 0), CLOSED)
        pg.set_oriented((0, 0), (0, 1), OPEN)
        with pytest.raises(ValueError, match="already tested"):
            pg.set_oriented((0, 0), (0, 1), OPEN)
        pg.set_x((1, 1), 17)
        with pytest.raises(ValueError, match="already has"):
            pg.set_x((1, 1), 18)
        with pytest.raises(ValueError, match="not adjacent"):
            pg.set_oriented((0, 0), (0, 0), OPEN)

    def test_counts(self):
        pg = PartialGridConfig(2)
        pg.set_node((0, 0), OPEN)
        pg.set_node((0, 1), CLOSED)
        pg.set_oriented((0, 0), (0, 1), OPEN)
        pg.set_oriented((0, 0), (1, 0), CLOSED)
        assert pg.counts() == {
            "nodes_open": 1,
            "nodes_closed": 1,
            "links_open": 1,
            "links_tested": 2,
        }


class TestExploreGrid:
    def test_all_success_sweep_builds_a_spanning_tree(self):
        m = 2
        links = []

        def activate(u):
            return 100

        def node_test(u, x):
            return True

        def link_test(u, v):
            links.append((u, v))
            return True, 200 + len(links)

        config, trace = explore_grid(m, activate, node_test, link_test)
        assert trace == [
            ("activate", (0, 0), 100),
            ("node", (0, 0), True),
            ("link", (0, 0), (0, 1), True),
            ("link", (0, 0), (1, 0), True),
            ("node", (0, 1), True),
            ("link", (0, 1), (1, 1), True),
            ("node", (1, 0), True),
            ("node", (1, 1), True),
        ]
        # m^2 - 1 successful links: one per node after the first.
        assert len(links) == 3
        assert (config.node_state == OPEN).all()
        assert config.counts()["links_open"] == 3
        assert config.x_at((0, 0)) == 100
        assert config.x_at((1, 1)) == 203

    def test_failures_fall_back_to_fresh_activation(self):
        m = 2
        node_outcome = {(0, 0): False, (1, 0): True, (1, 1): True}
        activations = []

        def activate(u):
            activations.append(u)
            return None if u == (0, 1) else 50

        def node_test(u, x):
            return node_outcome[u]

        def link_test(u, v):
            return False, None

        config, trace = explore_grid(m, activate, node_test, link_test)
        assert trace == [
            ("activate", (0, 0), 50),
            ("node", (0, 0), False),
            ("activate", (0, 1), None),
            ("activate", (1, 0), 50),
            ("node", (1, 0), True),
            ("link", (1, 0), (1, 1), False),
            ("activate", (1, 1), 50),
            ("node", (1, 1), True),
        ]
        assert activations == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert config.node((0, 0)) == CLOSED
        assert config.node((0, 1)) == CLOSED  # no seed: closed without a node event
        assert config.node((1, 0)) == OPEN
        assert config.counts()["links_open"] == 0

    def test_links_are_tested_only_toward_unseen_nodes(self):
        m = 3
        tested = []

        def link_test(u, v):
            tested.append((u, v))
            return True, 7

        explore_grid(m, lambda u: 1, lambda u, x: True, link_test)
        targets = [v for _, v in tested]
        assert len(targets) == len(set(targets)) == m * m - 1


@pytest.fixture(scope="module")
def rich_web():
    pts = sample_points(8000, 11)
    idx = GridIndex(pts, cell_size=0.035)
    law = parse_law("3:1.0")
    g = sample_irrigation(pts, idx, 0.035, law, seed=11)
    frame = LatticeFrame(pts, 0.035, 3, 1)
    result = build_web(g, frame, threshold=2)
    return pts, g, frame, result


class TestBuildWeb:
    def test_produces_a_nonempty_web_with_consistent_counts(self, rich_web):
        pts, g, frame, result = rich_web
        assert result.web_size > 0
        assert int(result.box_counts.sum()) == result.web_size
        assert 0.0 < result.coverage <= 1.0
        counts = result.config.counts()
        assert result.nodes_open == counts["nodes_open"]
        assert result.links_open == counts["links_open"]
        assert result.threshold == 2

    def test_bushes_stay_inside_their_cells(self, rich_web):
        pts, g, frame, result = rich_web
        assert result.nodes_open == len(result.bushes)
        for cell, bush in result.bushes.items():
            cid = cell[0] * frame.m + cell[1]
            assert np.all(frame.point_cell_id[bush] == cid)

    def test_one_node_event_per_cell_and_x_assigned_once(self, rich_web):
        pts, g, frame, result = rich_web
        node_events = [t for t in result.trace if t[0] == "node"]
        assert len({t[1] for t in node_events}) == len(node_events)
        activations = [t[1] for t in result.trace if t[0] == "activate"]
        link_targets = [t[2] for t in result.trace if t[0] == "link" and t[3]]
        seen_once = activations + link_targets
        assert len(seen_once) == len(set(seen_once))
        assert (result.config.node_state != UNTESTED).all()

    def test_rerun_is_bit_identical(self, rich_web):
        pts, g, frame, result = rich_web
        again = build_web(g, frame, threshold=2)
        assert np.array_equal(result.web, again.web)
        assert result.trace == again.trace
        assert np.array_equal(result.config.node_state, again.config.node_state)
        assert np.array_equal(result.forbidden.flags, again.forbidden.flags)

    def test_forbidden_set_only_grows(self):
        pts = sample_points(3000, 21)
        idx = GridIndex(pts, cell_size=0.035)
        g = sample_irrigation(pts, idx, 0.035, parse_law("3:1.0"), seed=21)
        frame = LatticeFrame(pts, 0.035, 3, 1)
        snapshots = []

        class RecordingForbidden(ForbiddenSet):
            def add(self, vertices):
                super().add(vertices)
                snapshots.append(len(self))

        original = web_mod.ForbiddenSet
        web_mod.ForbiddenSet = RecordingForbidden
        try:
            build_web(g, frame, threshold=2)
        finally:
            web_mod.ForbiddenSet = original
        assert snapshots == sorted(snapshots)

    def test_default_threshold_comes_from_the_law(self):
        pts = sample_points(1500, 3)
        idx = GridIndex(pts, cell_size=0.05)
        g = sample_irrigation(pts, idx, 0.05, parse_law("3:1.0"), seed=3)
        frame = LatticeFrame(pts, 0.05, 3, 1)
        assert default_node_threshold(g.law, 3) == 141  # ceil(3^4.5)
        result = build_web(g, frame)
        assert result.threshold == 141

    def test_mismatched_point_sets_are_rejected(self, rich_web):
        pts, g, frame, result = rich_web
        other = LatticeFrame(sample_points(100, 0), 0.035, 3, 1)
        with pytest.raises(ValueError, match="same points"):
            build_web(g, other)

    def test_coverage_is_monotone_in_threshold(self, rich_web):
        pts, g, frame, result = rich_web
        assert web_coverage(result, 1) >= web_coverage(result, 2) >= web_coverage(result, 5)
        assert web_coverage(result, 0) == 1.0

    def test_hookup_fraction_names_the_carrying_component(self, rich_web):
        pts, g, frame, result = rich_web
        frac = hookup_fraction(g, result)
        assert 0.0 < frac <= 1.0
        # Reference: the component holding the plurality of web vertices.
        from irrigation_lab.components import components
        from irrigation_lab.irrigation import undirected_view

        census = components(undirected_view(g))
        roots, tallies = np.unique(census.component_id[result.web], return_counts=True)
        best = roots[np.argmax(tallies)]
        assert frac == pytest.approx(np.count_nonzero(census.component_id == best) / g.n)

    def test_empty_web_raises_on_hookup(self):
        pts = sample_points(1500, 3)
        idx = GridIndex(pts, cell_size=0.05)
        g = sample_irrigation(pts, idx, 0.05, parse_law("1:1.0"), seed=3)
        frame = LatticeFrame(pts, 0.05, 3, 1)
        result = build_web(g, frame, threshold=10**6)
        assert result.web_size == 0
        with pytest.raises(ValueError, match="web is empty"):
            hookup_fraction(g, result)
