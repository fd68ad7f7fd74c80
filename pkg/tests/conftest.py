import itertools

import networkx as nx
import numpy as np
import pytest

from spanprog.graphs import SimpleGraph


def from_nx(h: nx.Graph) -> SimpleGraph:
    nodes = sorted(h.nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    return SimpleGraph(len(nodes), frozenset((min(idx[u], idx[v]), max(idx[u], idx[v])) for u, v in h.edges))


def to_nx(g: SimpleGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def all_small_graphs(max_n: int = 7, min_n: int = 1):
    """Every graph up to isomorphism with ``min_n..max_n`` vertices (networkx atlas)."""
    return [from_nx(h) for h in nx.graph_atlas_g() if min_n <= h.number_of_nodes() <= max_n]


def all_labelled_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield SimpleGraph(n, frozenset(e for b, e in enumerate(pairs) if mask >> b & 1))


def nx_has_subgraph(host: SimpleGraph, pattern: SimpleGraph) -> bool:
    gm = nx.algorithms.isomorphism.GraphMatcher(to_nx(host), to_nx(pattern))
    return gm.subgraph_is_monomorphic()


@pytest.fixture(scope="session")
def small_graphs():
    return all_small_graphs(7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
