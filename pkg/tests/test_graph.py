import itertools

import pytest

from sqoa.errors import ValidationError
from sqoa.graph import (
    Graph,
    best_cut,
    cut_value,
    generate_regular_graph,
    graph_from_text,
    graph_to_text,
    greedy_coloring,
    validate_coloring,
)


def naive_max_cut(g):
    """Exhaustive 2^n scan, kept deliberately separate from the Gray-code path."""
    best = 0
    for bits in range(1 << g.n):
        spins = [1 if (bits >> v) & 1 == 0 else -1 for v in range(g.n)]
        best = max(best, cut_value(g, spins))
    return best


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ValidationError):
            Graph(3, ((0, 0),))

    def test_rejects_parallel_edges(self):
        with pytest.raises(ValidationError):
            Graph(3, ((0, 1), (1, 0)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            Graph(3, ((0, 3),))

    def test_edges_normalized_sorted(self):
        g = Graph(4, ((3, 1), (2, 0)))
        assert g.edges == ((0, 2), (1, 3))

    def test_connectivity(self):
        assert Graph(3, ((0, 1), (1, 2))).is_connected()
        assert not Graph(4, ((0, 1), (2, 3))).is_connected()


class TestGeneration:
    def test_n4_degree3_is_k4(self):
        # K4 is the only simple 3-regular graph on 4 vertices
        for seed in (0, 1, 99):
            g = generate_regular_graph(4, 3, seed)
            assert g.edges == tuple(itertools.combinations(range(4), 2))

    def test_odd_stub_count_rejected(self):
        with pytest.raises(ValidationError):
            generate_regular_graph(5, 3, 0)

    def test_degree_at_least_n_rejected(self):
        with pytest.raises(ValidationError):
            generate_regular_graph(3, 3, 0)

    def test_deterministic_for_seed(self):
        a = generate_regular_graph(20, 3, 7)
        b = generate_regular_graph(20, 3, 7)
        assert a.edges == b.edges

    def test_retry_budget_signals_failure(self):
        with pytest.raises(ValidationError):
            generate_regular_graph(20, 3, 0, max_retries=0)

    def test_degree_and_simplicity_over_seeds(self):
        # Graph.__post_init__ enforces simplicity; check regularity here
        for seed in range(100):
            g = generate_regular_graph(20, 3, seed)
            assert list(g.degrees()) == [3] * 20
            assert g.m == 30


class TestColoring:
    def test_k4_needs_four_colors(self):
        g = generate_regular_graph(4, 3, 0)
        c = greedy_coloring(g)
        assert c.num_colors == 4
        validate_coloring(g, c)

    def test_even_cycle_two_colors(self):
        g = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
        c = greedy_coloring(g)
        assert c.num_colors == 2
        validate_coloring(g, c)

    def test_random_cubic_at_most_four_colors(self):
        g = generate_regular_graph(20, 3, 7)
        c = greedy_coloring(g)
        assert c.num_colors <= 4
        validate_coloring(g, c)

    def test_properness_over_many_instances(self):
        for seed in range(50):
            g = generate_regular_graph(18, 3, seed)
            validate_coloring(g, greedy_coloring(g))

    def test_balance_reduces_packed_qubits(self):
        # packed qubit count = sum(ceil(size/3)); balancing should never lose
        for seed in range(10):
            g = generate_regular_graph(40, 3, seed)
            plain = greedy_coloring(g, balance=False)
            packed = greedy_coloring(g, balance=True)
            cost = lambda c: sum(-(-s // 3) for s in c.class_sizes())
            assert cost(packed) <= cost(plain)
            validate_coloring(g, packed)

    def test_forty_nodes_pack_to_fourteen_qubits(self):
        hits = 0
        for seed in range(10):
            g = generate_regular_graph(40, 3, seed)
            c = greedy_coloring(g)
            if sum(-(-s // 3) for s in c.class_sizes()) == 14:
                hits += 1
        assert hits >= 8  # ceil(40/3) = 14 is the floor; almost all reach it


class TestBestCut:
    def test_single_edge(self):
        res = best_cut(Graph(2, ((0, 1),)), "certified")
        assert res.value == 1 and res.certified

    def test_k4(self):
        g = generate_regular_graph(4, 3, 0)
        res = best_cut(g, "certified")
        assert res.value == naive_max_cut(g) == 4

    def test_five_cycle(self):
        g = Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4)))
        res = best_cut(g, "certified")
        assert res.value == naive_max_cut(g) == 4

    def test_assignment_recounts_to_value(self):
        g = generate_regular_graph(12, 3, 3)
        res = best_cut(g, "certified")
        assert cut_value(g, res.assignment) == res.value

    def test_certified_matches_naive_enumeration(self):
        for n, seed in ((8, 0), (12, 1), (16, 2)):
            g = generate_regular_graph(n, 3, seed)
            assert best_cut(g, "certified").value == naive_max_cut(g)

    def test_certified_size_cap(self):
        g = generate_regular_graph(30, 3, 0)
        with pytest.raises(ValidationError):
            best_cut(g, "certified")

    def test_best_found_bounded_and_tight_on_small(self):
        for seed in range(5):
            g = generate_regular_graph(16, 3, seed)
            exact = best_cut(g, "certified")
            approx = best_cut(g, "best_found", seed=seed, restarts=20)
            assert not approx.certified
            assert approx.value <= exact.value
            assert approx.value == exact.value  # 20 restarts suffice at n=16

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            best_cut(Graph(2, ((0, 1),)), "exhaustive")


class TestEdgeListFormat:
    def test_roundtrip(self):
        g = generate_regular_graph(10, 3, 5)
        assert graph_from_text(graph_to_text(g)).edges == g.edges

    def test_layout(self):
        text = graph_to_text(Graph(3, ((1, 2), (0, 1))))
        assert text == "3 2\n0 1\n1 2\n"

    def test_rejects_bad_header(self):
        with pytest.raises(ValidationError):
            graph_from_text("3\n0 1\n")

    def test_rejects_wrong_edge_count(self):
        with pytest.raises(ValidationError):
            graph_from_text("3 2\n0 1\n")
