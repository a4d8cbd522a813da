import numpy as np
import pytest

from patternsynth.errors import UsageError
from patternsynth.quadtree import (
    ALL_DIRS,
    DIRECTIONS,
    QTS,
    build_qts,
    build_quadtree,
    lpaths_successors,
    mean,
    qts_from_observation,
)


def checkerboard(side=8):
    return np.fromfunction(lambda i, j: (i + j) % 2, (side, side))


def block_mean_oracle(values, i0, i1, j0, j1, c):
    total = 0.0
    for i in range(i0, i1):
        for j in range(j0, j1):
            total += values[i, j, c]
    return total / ((i1 - i0) * (j1 - j0))


class TestQuadTree:
    def test_two_by_two_diagonal(self):
        qt = build_quadtree(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert qt.root.means == (0.5,)
        assert len(qt.root.children) == 4
        assert all(c.is_leaf for c in qt.root.children.values())

    def test_uniform_image_is_single_leaf(self):
        qt = build_quadtree(np.full((8, 8), 0.37))
        assert qt.vertex_count() == 1
        assert qt.root.is_leaf

    def test_vertex_bound_eight_by_eight(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            qt = build_quadtree(rng.uniform(0, 1, (8, 8)))
            assert qt.vertex_count() <= 85  # 1 + 4 + 16 + 64

    def test_vertex_bound_general(self):
        rng = np.random.default_rng(1)
        for side in (8, 16, 32):
            k = side.bit_length() - 1
            bound = sum(4 ** i for i in range(k + 1))
            qt = build_quadtree(rng.uniform(0, 1, (side, side)))
            assert qt.vertex_count() <= bound

    def test_parent_mean_is_average_of_children(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            qt = build_quadtree(rng.uniform(0, 1, (16, 16, 2)))
            for v in qt.vertices():
                if v.is_leaf:
                    continue
                for c in range(2):
                    avg = sum(v.children[d].means[c] for d in DIRECTIONS) / 4.0
                    assert abs(v.means[c] - avg) < 1e-9

    def test_means_match_direct_summation(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(0, 1, (8, 8, 2))
        qt = build_quadtree(values)
        for v in qt.vertices():
            for c in range(2):
                oracle = block_mean_oracle(values, v.i0, v.i1, v.j0, v.j1, c)
                assert mean(v, c) == pytest.approx(oracle, abs=1e-12)

    def test_checkerboard_root_mean(self):
        qt = build_quadtree(checkerboard())
        assert qt.root.means == (0.5,)

    def test_single_cell_leaf_value(self):
        values = np.arange(16, dtype=float).reshape(4, 4) / 16.0
        qt = build_quadtree(values)
        leaves = [v for v in qt.vertices() if v.is_leaf]
        for v in leaves:
            if v.side == 1:
                assert v.means[0] == values[v.i0, v.j0]

    def test_rejects_bad_shapes(self):
        with pytest.raises(UsageError):
            build_quadtree(np.zeros((6, 6)))
        with pytest.raises(UsageError):
            build_quadtree(np.zeros((4, 8)))
        with pytest.raises(UsageError):
            build_quadtree(np.zeros((8, 8)), quant_levels=1)


class TestQTS:
    def test_uniform_image_single_state(self):
        qts = qts_from_observation(np.full((8, 8), 0.5))
        assert qts.n_states == 1
        assert qts.labels[qts.initial] == {qts.initial: ALL_DIRS}

    def test_checkerboard_five_states(self):
        qts = qts_from_observation(checkerboard())
        qts.validate()
        assert qts.n_states == 5
        d1 = qts.successor_along(qts.initial, "NW")
        assert all(qts.successor_along(qts.initial, d) == d1 for d in DIRECTIONS)
        d2 = qts.successor_along(d1, "NW")
        white = qts.successor_along(d2, "NE")
        black = qts.successor_along(d2, "NW")
        assert qts.values[white] == (1.0,)
        assert qts.values[black] == (0.0,)
        assert qts.has_self_loop(white) and qts.has_self_loop(black)

    def test_self_loop_exists_on_random_inputs(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            side = int(rng.choice([8, 16, 32]))
            qts = qts_from_observation(rng.uniform(0, 1, (side, side)))
            assert any(qts.has_self_loop(s) for s in range(qts.n_states))

    def test_label_partition_on_random_inputs(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            qts = qts_from_observation(rng.uniform(0, 1, (16, 16)))
            qts.validate()

    def test_all_states_reachable(self):
        rng = np.random.default_rng(6)
        qts = qts_from_observation(rng.uniform(0, 1, (16, 16)))
        seen = {qts.initial}
        frontier = [qts.initial]
        while frontier:
            s = frontier.pop()
            for t in qts.labels[s]:
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        assert seen == set(range(qts.n_states))

    def test_deterministic_construction(self):
        rng = np.random.default_rng(7)
        values = rng.uniform(0, 1, (16, 16))
        a = qts_from_observation(values.copy())
        b = qts_from_observation(values.copy())
        assert a.to_text() == b.to_text()

    def test_round_trip_values_on_bin_center_data(self):
        # pixels at quantization-bin centers: merged states keep exact means
        rng = np.random.default_rng(8)
        values = (rng.integers(0, 16, (16, 16)) + 0.5) / 16.0
        qt = build_quadtree(values)
        qts = build_qts(qt)

        def walk(vertex, state):
            for c in range(len(vertex.means)):
                assert qts.values[state][c] == vertex.means[c]
            for d, child in vertex.children.items():
                walk(child, qts.successor_along(state, d))

        walk(qt.root, qts.initial)

    def test_lpaths_successors(self):
        qts = qts_from_observation(checkerboard())
        d2 = qts.successor_along(qts.successor_along(qts.initial, "NW"), "NW")
        white = qts.successor_along(d2, "NE")
        black = qts.successor_along(d2, "NW")
        assert lpaths_successors(qts, d2, {"SW", "NE"}) == {white}
        assert lpaths_successors(qts, d2, {"NW", "SE"}) == {black}
        assert lpaths_successors(qts, d2, ALL_DIRS) == {white, black}
        assert lpaths_successors(qts, white, {"NW"}) == {white}
        with pytest.raises(UsageError):
            lpaths_successors(qts, d2, set())

    def test_text_round_trip(self):
        rng = np.random.default_rng(9)
        qts = qts_from_observation(rng.uniform(0, 1, (8, 8)))
        back = QTS.from_text(qts.to_text())
        assert back.n_states == qts.n_states
        assert back.initial == qts.initial
        assert back.labels == qts.labels
        for s in range(qts.n_states):
            for va, vb in zip(qts.values[s], back.values[s]):
                assert vb == pytest.approx(va, abs=5e-7)

    def test_dot_output_mentions_states(self):
        qts = qts_from_observation(checkerboard())
        dot = qts.to_dot()
        assert dot.startswith("digraph")
        assert "s0 -> s0" in dot
