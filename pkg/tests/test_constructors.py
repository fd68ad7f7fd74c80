import itertools
from collections import Counter

import numpy as np
import pytest

from conftest import all_labelled_graphs, all_small_graphs
from spanprog.constructors import (CONNECTED, GadgetGraph, StarPattern, TwoLegStar, doubled_coloring,
                                   incorrectly_colored_star_example, is_forest, k5_counterexample_check,
                                   minor_only_star_example, path_instance, path_success_probability,
                                   skew_minor_check, skew_vertex_label, star_forest_detect, star_hprime,
                                   star_hprime_witness, star_program, stconn_program, triangle_levels,
                                   triangle_negative_witness, triangle_program, two_leg_counts,
                                   two_leg_star_instance, uniform_lift_certificate)
from spanprog.graphs import (Coloring, GraphError, MarkedGraph, SimpleGraph, gnp, k5_marked, path,
                             random_coloring, random_forest, subdivided_star, triangle)
from spanprog.oracles import (contains_minor, contains_subgraph, distance, effective_resistance,
                              has_correctly_colored_subgraph, is_connected)
from spanprog.span import (check_negative_witness, check_positive_witness, evaluate, negative_witness,
                           positive_witness)


def cycle(n):
    return SimpleGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


# st-connectivity

def test_stconn_structure():
    inst = stconn_program(4, 1, 3)
    p = inst.program
    assert p.n_inputs == 6 and p.nvars == 6 and p.n_free == 0
    assert p.target.tolist() == [0, -1, 0, 1]
    for (u, v), j in inst.pair_index.items():
        col = p.inputs[:, j]
        assert col[u] == 1 and col[v] == -1 and np.count_nonzero(col) == 2
        assert p.input_vars[j] == j and p.input_bits[j] == 1


def test_stconn_errors():
    with pytest.raises(GraphError):
        stconn_program(3, 1, 1)
    with pytest.raises(GraphError):
        stconn_program(3, 0, 3)
    with pytest.raises(GraphError):
        stconn_program(3, 0, 2).assignment(path(3))


def test_stconn_exhaustive_small():
    for n in range(2, 5):
        for g in all_labelled_graphs(n):
            for s, t in itertools.permutations(range(n), 2):
                inst = stconn_program(n, s, t)
                assert evaluate(inst.program, inst.assignment(g)) == is_connected(g, s, t)


def test_stconn_k3_adjacent():
    inst = stconn_program(3, 0, 1)
    assert positive_witness(inst.program, inst.assignment(triangle())).size == pytest.approx(2 / 3)


def test_stconn_positive_size_is_resistance():
    for seed in range(40):
        g = gnp(7, 0.4, seed)
        if not is_connected(g, 0, 6):
            continue
        inst = stconn_program(7, 0, 6)
        size = positive_witness(inst.program, inst.assignment(g)).size
        assert size == pytest.approx(effective_resistance(g, 0, 6), abs=1e-6)
        assert size <= distance(g, 0, 6) + 1e-9


# path detection by color coding

def test_path_instance_in_order_coloring_connects():
    for k in range(1, 6):
        pi = path_instance(path(k), k, list(range(k + 1)))
        assert evaluate(pi.instance.program, pi.assignment)
        assert pi.graph.n == k + 3
        assert distance(pi.graph, k + 1, k + 2) == k + 2


def test_path_instance_errors():
    with pytest.raises(GraphError):
        path_instance(path(2), 0, [0, 0, 0])
    with pytest.raises(GraphError):
        path_instance(path(2), 2, [0, 1, 3])
    with pytest.raises(GraphError):
        path_instance(path(2), 2, [0, 1])


def test_path_connected_iff_colorful_path_exists():
    """Connected in H exactly when some k-path of g is colored 0..k in order."""
    for k in (1, 2, 3):
        for g in all_small_graphs(5, min_n=k + 1):
            has_path = contains_subgraph(g, path(k))
            for col in itertools.product(range(k + 1), repeat=g.n):
                pi = path_instance(g, k, list(col))
                conn = is_connected(pi.graph, g.n, g.n + 1)
                ref = any(all(g.has_edge(w[i], w[i + 1]) for i in range(k))
                          and all(col[w[i]] == i for i in range(k + 1))
                          for w in itertools.permutations(range(g.n), k + 1))
                assert conn == ref
                assert not conn or has_path


def test_path_success_probability():
    assert path_success_probability(2) == pytest.approx(2 / 27)


# subdivided stars

def star_exact(legs):
    T = StarPattern(legs)
    g = T.graph()
    return T, Coloring(T.labels, T.labels), g


@pytest.mark.parametrize("legs", [(1,), (2,), (1, 1, 1), (1, 3, 1), (2, 2)])
def test_star_dimension_formula(legs):
    T = StarPattern(legs)
    rng = np.random.default_rng(len(legs))
    for seed in range(5):
        g = gnp(7, 0.5, seed)
        c = random_coloring(g, T.labels, int(rng.integers(1 << 30)))
        inst = star_program(T, c, g)
        n_root = len(c.preimage(0))
        assert inst.program.dim == 2 + n_root * (T.d + 1) + 2 * (g.n - n_root)


@pytest.mark.parametrize("legs", [(1,), (2,), (1, 1, 1), (1, 3, 1), (2, 2, 2)])
def test_star_accepts_exact_copy(legs):
    T, c, g = star_exact(legs)
    inst = star_program(T, c, g)
    x = inst.assignment
    assert evaluate(inst.program, x)
    wit = positive_witness(inst.program, x)
    assert check_positive_witness(inst.program, x, wit)
    # one unit of flow out and back along each leg
    assert wit.size <= 2 * sum(legs) + 1e-9
    assert star_hprime_witness(T, c, g) == CONNECTED


def test_star_label_mismatch():
    T = StarPattern((1, 1))
    with pytest.raises(GraphError):
        star_program(T, Coloring((0, 1), (0, 1, 0)), path(2))
    with pytest.raises(GraphError):
        StarPattern(())
    with pytest.raises(GraphError):
        StarPattern((1, 0))


def test_star_paired_columns_are_four_term_vectors():
    T, c, g = star_exact((2, 1, 2))
    inst = star_program(T, c, g)
    H = inst.gadget
    assert len(inst.paired_columns) == len(H.paired) == T.d
    for (i, j), col in zip(H.paired, inst.paired_columns):
        vec = inst.program.inputs[:, col]
        assert sorted(vec[vec != 0].tolist()) == [-1, -1, 1, 1]
        touched = set(np.flatnonzero(vec).tolist())
        assert touched == set(H.edges[i]) | set(H.edges[j])
    # a single coefficient per paired vector carries both edges
    wit = positive_witness(inst.program, inst.assignment)
    for col in inst.paired_columns:
        assert abs(wit.w[col]) == pytest.approx(1.0)


def test_gadget_round_trip():
    T, c, g = star_exact((1, 2))
    gadget = star_program(T, c, g).gadget
    text = gadget.to_edge_list()
    back = GadgetGraph.from_edge_list(text, gadget.labels)
    assert back == gadget
    assert "#paired" in text and "#free" in text


def test_gadget_validation():
    with pytest.raises(GraphError):
        GadgetGraph((0, 1, 2, 3), ((2, 3), (0, 2)), ((0, 1),), ())
    with pytest.raises(GraphError):
        GadgetGraph((0, 1, 2, 3), ((2, 3), (3, 2), (2, 3)), ((0, 1), (1, 2)), ())
    with pytest.raises(GraphError):
        GadgetGraph.from_edge_list("4 2\n0 1\n")


def test_incorrectly_colored_example_rejects():
    ex = incorrectly_colored_star_example()
    inst = star_program(ex.pattern, ex.coloring, ex.graph)
    assert not evaluate(inst.program, inst.assignment)
    assert contains_subgraph(ex.graph, ex.pattern.graph())
    assert not has_correctly_colored_subgraph(ex.graph, ex.coloring, ex.pattern.graph())
    H = inst.gadget
    assert is_connected(H.graph(), H.s, H.t)
    wit = star_hprime_witness(ex.pattern, ex.coloring, ex.graph)
    assert wit != CONNECTED
    assert check_negative_witness(inst.program, inst.assignment, wit.wprime, tol=1e-12)


def test_minor_only_example_accepts():
    ex = minor_only_star_example()
    inst = star_program(ex.pattern, ex.coloring, ex.graph)
    assert evaluate(inst.program, inst.assignment)
    assert not contains_subgraph(ex.graph, ex.pattern.graph(), pattern_limit=9)
    assert contains_minor(ex.graph, ex.pattern.graph(), pattern_limit=9)


def test_hprime_rules_on_exact_copy():
    T, c, g = star_exact((1, 1))
    edges, removed, added = star_hprime(T, c, g)
    # both legs are traversable, so each root segment gets its shortcut and the leg vertices vanish
    assert len(added) == 2 and len(removed) == 4
    assert all(a not in removed and b not in removed for a, b in edges)


def test_hprime_witness_valid_without_minor():
    rng = np.random.default_rng(7)
    checked = 0
    for T in (StarPattern((1, 1, 1)), StarPattern((2, 1))):
        for g in all_small_graphs(6, min_n=4):
            if contains_minor(g, T.graph()):
                continue
            for _ in range(3):
                c = random_coloring(g, T.labels, int(rng.integers(1 << 30)))
                inst = star_program(T, c, g)
                wit = star_hprime_witness(T, c, g)
                assert wit != CONNECTED
                assert check_negative_witness(inst.program, inst.assignment, wit.wprime)
                assert wit.size <= 4 * inst.program.n_inputs
                checked += 1
    assert checked > 100


def test_star_forest():
    claw = StarPattern((1, 1, 1))
    assert star_forest_detect([], path(2), seed=0)
    two = claw.graph().disjoint_union(claw.graph())
    col = Coloring(tuple(range(8)), tuple(range(8)))
    assert star_forest_detect([claw, claw], two, coloring=col)
    one = claw.graph().disjoint_union(path(2))
    assert not contains_minor(one, two)
    for seed in range(40):
        assert not star_forest_detect([claw, claw], one, seed=seed)


# triangles

def test_triangle_k3():
    c = Coloring((0, 1, 2), (0, 1, 2))
    inst = triangle_program(c, triangle())
    assert evaluate(inst.program, inst.assignment)
    assert positive_witness(inst.program, inst.assignment).size <= 3 + 1e-9


def test_triangle_rejects_path_closing_on_other_vertex():
    g = path(3)
    inst = triangle_program(Coloring((0, 1, 2), (0, 1, 2, 0)), g)
    assert not evaluate(inst.program, inst.assignment)


def test_triangle_five_cycle_false_accept():
    inst = triangle_program(Coloring((0, 1, 2), (0, 1, 2, 1, 2)), cycle(5))
    assert evaluate(inst.program, inst.assignment)
    assert not contains_subgraph(cycle(5), triangle())


def test_triangle_single_vertex_witness():
    c = Coloring((0, 1, 2), (0,))
    g = SimpleGraph(1, frozenset())
    wit = triangle_negative_witness(c, g)
    inst = triangle_program(c, g)
    b = inst.basis
    assert wit.wprime[b[(0, 0)]] - wit.wprime[b[(0, 3)]] == pytest.approx(-1)
    assert check_negative_witness(inst.program, inst.assignment, wit.wprime)


def test_triangle_forest_witnesses_and_levels():
    rng = np.random.default_rng(11)
    for n in range(1, 9):
        for rep in range(12):
            forest = random_forest(n, int(rng.integers(1 << 30)))
            for _ in range(8):
                c = random_coloring(forest, (0, 1, 2), int(rng.integers(1 << 30)))
                inst = triangle_program(c, forest)
                wit = triangle_negative_witness(c, forest)
                assert wit.wprime[inst.basis[("t",)]] == 0
                assert check_negative_witness(inst.program, inst.assignment, wit.wprime)
                lv = triangle_levels(c, forest)
                for (u, _), lev in lv.level.items():
                    assert abs(lev) <= lv.depth_h[u] + 1


def test_triangle_rejects_cycle_input():
    with pytest.raises(GraphError):
        triangle_negative_witness(Coloring((0, 1, 2), (0, 1, 2)), triangle())
    assert is_forest(path(4)) and not is_forest(cycle(4))


def test_triangle_negative_optimum_no_larger_than_level_witness():
    rng = np.random.default_rng(12)
    for _ in range(30):
        forest = random_forest(8, int(rng.integers(1 << 30)))
        c = random_coloring(forest, (0, 1, 2), int(rng.integers(1 << 30)))
        inst = triangle_program(c, forest)
        opt = negative_witness(inst.program, inst.assignment).size
        assert opt <= triangle_negative_witness(c, forest).size + 1e-9


# star with two subdivided legs

def test_two_leg_counts_figure_shape():
    T = TwoLegStar(4, 3, 2)
    assert T.n_vertices == 6
    assert two_leg_counts(T, [3] * 6) == (38, 69)


def test_two_leg_counts_match_instance():
    T = TwoLegStar(4, 3, 2)
    rng = np.random.default_rng(3)
    for seed in range(10):
        g = gnp(9, 0.4, seed)
        c = random_coloring(g, T.labels, int(rng.integers(1 << 30)))
        inst = two_leg_star_instance(T, c, g)
        sizes = [len(c.preimage(lab)) for lab in T.labels]
        assert two_leg_counts(T, sizes) == (len(inst.labels), len(inst.possible_edges))


@pytest.mark.parametrize("k, hub, d", [(3, 2, 1), (4, 3, 2), (5, 2, 3), (5, 4, 1)])
def test_two_leg_exact_copy_path_length(k, hub, d):
    T = TwoLegStar(k, hub, d)
    g = T.graph()
    inst = two_leg_star_instance(T, Coloring(T.labels, T.labels), g)
    assert distance(inst.graph, inst.s, inst.t) == k + 2 * d + 1
    assert evaluate(inst.program, inst.assignment)


def test_two_leg_hub_range():
    for hub in (1, 4):
        with pytest.raises(GraphError):
            TwoLegStar(4, hub, 1)
    with pytest.raises(GraphError):
        TwoLegStar(4, 2, 0)


def test_two_leg_evaluate_matches_connectivity():
    T = TwoLegStar(3, 2, 1)
    rng = np.random.default_rng(4)
    for seed in range(30):
        g = gnp(6, 0.5, seed)
        c = random_coloring(g, T.labels, int(rng.integers(1 << 30)))
        inst = two_leg_star_instance(T, c, g)
        conn = is_connected(inst.graph, inst.s, inst.t)
        assert evaluate(inst.program, inst.assignment) == conn
        assert conn == has_correctly_colored_subgraph(g, c, T.graph())


# skew products

def test_k5_skew_product_has_no_k5_minor():
    rep = k5_counterexample_check()
    assert not rep.contains_minor
    assert rep.every_edge_doubled
    assert len(rep.lifted_edge_counts) == 10


@pytest.mark.parametrize("marks", list(itertools.product((0, 1), repeat=3)))
def test_triangle_skew_products_contain_triangle(marks):
    t = MarkedGraph(triangle(), dict(zip(sorted(triangle().edges), marks)))
    assert skew_minor_check(t).contains_minor


def test_tree_skew_products_contain_tree():
    T = subdivided_star(1, 2)
    for marks in itertools.product((0, 1), repeat=3):
        assert skew_minor_check(MarkedGraph(T, dict(zip(sorted(T.edges), marks)))).contains_minor


def test_uniform_lift_certificate_projects_to_base():
    t = k5_marked()
    total = uniform_lift_certificate(t)
    assert np.array_equal(total, np.ones((5, 5)) - np.eye(5))
    col = doubled_coloring(t)
    assert Counter(col.assignment) == {v: 2 for v in range(5)}
    assert skew_vertex_label(t, 7) == (2, 1)
