import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import all_labelled_graphs, nx_has_subgraph, to_nx
from spanprog.graphs import (Coloring, GraphError, MarkedGraph, SimpleGraph, complete, gnp, k5_marked, path,
                             random_connected, random_forest, skew_product, subdivided_star, triangle)
from spanprog.oracles import (DISCONNECTED, BranchDecomposition, SizeLimitError, contains_minor,
                              contains_subgraph, distance, effective_resistance, find_minor,
                              has_correctly_colored_subgraph, is_connected)


def test_is_connected_examples():
    assert is_connected(path(2), 0, 2)
    assert not is_connected(SimpleGraph(2, frozenset()), 0, 1)
    assert is_connected(SimpleGraph(1, frozenset()), 0, 0)
    with pytest.raises(GraphError):
        is_connected(path(2), 0, 3)


@pytest.mark.parametrize("d", [1, 2, 5, 9])
def test_resistance_of_path(d):
    assert effective_resistance(path(d), 0, d) == pytest.approx(d)


def test_resistance_examples():
    assert effective_resistance(triangle(), 0, 1) == pytest.approx(2 / 3)
    r = effective_resistance(SimpleGraph.from_edges(4, [(0, 1), (2, 3)]), 0, 3)
    assert r is DISCONNECTED and float(r) == float("inf")
    with pytest.raises(GraphError):
        effective_resistance(path(2), 1, 1)


def test_resistance_matches_networkx():
    for seed in range(30):
        g = random_connected(9, 0.25, seed)
        ref = nx.resistance_distance(to_nx(g), 0, 8)
        assert effective_resistance(g, 0, 8) == pytest.approx(ref, abs=1e-9)


def test_resistance_bounded_by_distance_and_matches_connectivity():
    for seed in range(60):
        g = gnp(8, 0.3, seed)
        for s, t in [(0, 7), (1, 5), (2, 3)]:
            r = effective_resistance(g, s, t)
            assert (r is not DISCONNECTED) == is_connected(g, s, t)
            if r is not DISCONNECTED:
                assert r <= distance(g, s, t) + 1e-9


def test_subgraph_examples():
    assert contains_subgraph(complete(5), triangle())
    for seed in range(20):
        assert not contains_subgraph(random_forest(10, seed), triangle())
    assert not contains_subgraph(path(9), path(10), pattern_limit=12)


def test_subgraph_limits():
    with pytest.raises(SizeLimitError):
        contains_subgraph(path(20), path(2))
    with pytest.raises(SizeLimitError):
        contains_subgraph(path(5), path(9))


def test_subgraph_agrees_with_networkx():
    patterns = [path(3), subdivided_star(1, 1, 1), triangle(), complete(4), subdivided_star(1, 2),
                nx_cycle(5)]
    for seed in range(40):
        g = gnp(8, 0.35, seed)
        for p in patterns:
            assert contains_subgraph(g, p) == nx_has_subgraph(g, p)


def nx_cycle(n):
    return SimpleGraph(n, frozenset((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)))


def test_minor_examples():
    assert not contains_minor(skew_product(k5_marked()), complete(5))
    edge = path(1)
    assert contains_minor(path(3), edge)
    assert not contains_minor(SimpleGraph(4, frozenset()), edge)
    assert contains_minor(complete(6), complete(5))
    petersen = SimpleGraph.from_edges(10, [(i, (i + 1) % 5) for i in range(5)]
                                      + [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
                                      + [(i, i + 5) for i in range(5)])
    dec = find_minor(petersen, complete(5))
    assert dec is not None and dec.is_valid(petersen, complete(5))
    assert not contains_minor(petersen, complete(5).disjoint_union(path(1)), host_limit=12)


def test_tree_skew_products_contain_the_tree():
    trees = [subdivided_star(1, 2), path(3), subdivided_star(1, 1, 1)]
    for t in trees:
        for marks in itertools.product((0, 1), repeat=len(t.edges)):
            lift = skew_product(MarkedGraph(t, dict(zip(sorted(t.edges), marks))))
            assert contains_subgraph(lift, t)
            assert contains_minor(lift, t)


def test_branch_decomposition_validation():
    g = path(3)
    good = BranchDecomposition({0: frozenset({0, 1}), 1: frozenset({2, 3})})
    assert good.is_valid(g, path(1))
    assert not BranchDecomposition({0: frozenset({0, 2}), 1: frozenset({3})}).is_valid(g, path(1))
    assert not BranchDecomposition({0: frozenset({0}), 1: frozenset({0, 1})}).is_valid(g, path(1))
    assert not BranchDecomposition({0: frozenset({0}), 1: frozenset({2})}).is_valid(g, path(1))


def test_subgraph_implies_minor_random():
    rng = np.random.default_rng(5)
    for i in range(80):
        host = gnp(int(rng.integers(4, 11)), 0.35, i)
        pattern = gnp(int(rng.integers(2, 6)), 0.5, 1000 + i)
        if contains_subgraph(host, pattern):
            dec = find_minor(host, pattern)
            assert dec is not None and dec.is_valid(host, pattern)


def test_minor_equals_subgraph_for_paths_and_claws(small_graphs):
    for p in (path(3), subdivided_star(1, 1, 1)):
        for g in small_graphs:
            assert contains_minor(g, p) == contains_subgraph(g, p)


def test_minor_brute_force_on_five_vertices():
    """Compare with deletion/contraction closure on every labelled 5-vertex host."""
    def minors(g: nx.Graph, seen: set):
        key = nx.weisfeiler_lehman_graph_hash(g) + str(sorted(d for _, d in g.degree()))
        if any(nx.is_isomorphic(g, h) for h in seen.get(key, [])):
            return
        seen.setdefault(key, []).append(g)
        for e in list(g.edges):
            h = g.copy()
            h.remove_edge(*e)
            minors(h, seen)
            minors(nx.contracted_nodes(g, *e, self_loops=False), seen)
        for v in list(g.nodes):
            if g.degree(v) == 0:
                h = g.copy()
                h.remove_node(v)
                minors(h, seen)

    patterns = [complete(4), nx_cycle(4), subdivided_star(1, 1, 1), triangle().disjoint_union(path(1))]
    rng = np.random.default_rng(0)
    for i in range(25):
        g = gnp(6, float(rng.uniform(0.3, 0.8)), i)
        closure: dict = {}
        minors(nx.Graph(to_nx(g)), closure)
        found = [h for hs in closure.values() for h in hs]
        for p in patterns:
            ref = any(nx.is_isomorphic(h, to_nx(p)) for h in found if h.number_of_nodes() == p.n)
            assert contains_minor(g, p) == ref


def test_correctly_colored_subgraph():
    T = subdivided_star(1, 2)
    ident = Coloring(tuple(range(4)), (0, 1, 2, 3))
    assert has_correctly_colored_subgraph(T, ident, T)
    swapped = Coloring(tuple(range(4)), (0, 1, 3, 2))
    assert not has_correctly_colored_subgraph(T, swapped, T)
    missing = SimpleGraph.from_edges(4, [(0, 1), (0, 2)])
    assert not has_correctly_colored_subgraph(missing, ident, T)
    with pytest.raises(GraphError):
        has_correctly_colored_subgraph(T, Coloring((0, 1, 2), (0, 1, 2, 0)), T)


def test_correctly_colored_matches_brute_force():
    pattern = path(2)
    for n in (3, 4):
        for g in all_labelled_graphs(n):
            for assignment in itertools.product(range(3), repeat=n):
                c = Coloring((0, 1, 2), assignment)
                ref = any(g.has_edge(a, b) and g.has_edge(b, cc)
                          for a, b, cc in itertools.permutations(range(n), 3)
                          if (assignment[a], assignment[b], assignment[cc]) == (0, 1, 2))
                assert has_correctly_colored_subgraph(g, c, pattern) == ref
