"""Brute-force ground truth used to check the span-program constructions.

Everything here is exponential in the worst case and guarded by size limits.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graphs import Coloring, GraphError, SimpleGraph

DEFAULT_PATTERN_LIMIT = 8
DEFAULT_HOST_LIMIT = 12
PINV_RCOND = 1e-12


class SizeLimitError(GraphError):
    pass


@dataclass(frozen=True)
class Disconnected:
    """Effective resistance between vertices in different components."""

    def __float__(self):
        return float("inf")

    def __repr__(self):
        return "Disconnected()"


DISCONNECTED = Disconnected()


@dataclass(frozen=True)
class BranchDecomposition:
    branch_sets: dict  # pattern vertex -> frozenset of host vertices

    def is_valid(self, host: SimpleGraph, pattern: SimpleGraph) -> bool:
        sets = self.branch_sets
        if set(sets) != set(range(pattern.n)):
            return False
        used: set[int] = set()
        for x, bs in sets.items():
            if not bs or used & bs or not _is_connected_set(host, bs):
                return False
            used |= bs
        for x, y in pattern.edges:
            if not any(host.has_edge(a, b) for a in sets[x] for b in sets[y]):
                return False
        return True


def _check_vertex(g: SimpleGraph, v: int):
    if not 0 <= v < g.n:
        raise GraphError(f"vertex {v} out of range for n={g.n}")


def _bfs(adj: list[set[int]], s: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def is_connected(g: SimpleGraph, s: int, t: int) -> bool:
    _check_vertex(g, s)
    _check_vertex(g, t)
    return _bfs(g.adjacency(), s)[t] >= 0


def distance(g: SimpleGraph, s: int, t: int) -> int | None:
    _check_vertex(g, s)
    _check_vertex(g, t)
    d = _bfs(g.adjacency(), s)[t]
    return None if d < 0 else d


def laplacian(g: SimpleGraph) -> np.ndarray:
    L = np.zeros((g.n, g.n))
    for u, v in g.edges:
        L[u, u] += 1
        L[v, v] += 1
        L[u, v] -= 1
        L[v, u] -= 1
    return L


def effective_resistance(g: SimpleGraph, s: int, t: int) -> float | Disconnected:
    """Resistance distance with unit resistors, from the Laplacian pseudoinverse."""
    _check_vertex(g, s)
    _check_vertex(g, t)
    if s == t:
        raise GraphError("effective resistance needs s != t")
    if not is_connected(g, s, t):
        return DISCONNECTED
    chi = np.zeros(g.n)
    chi[s], chi[t] = 1.0, -1.0
    Lp = np.linalg.pinv(laplacian(g), rcond=PINV_RCOND, hermitian=True)
    return float(chi @ Lp @ chi)


# --------------------------------------------------------------------------
# Subgraph containment


def _check_limits(host: SimpleGraph, pattern: SimpleGraph, pattern_limit: int, host_limit: int):
    if pattern.n > pattern_limit:
        raise SizeLimitError(f"pattern has {pattern.n} vertices, limit {pattern_limit}")
    if host.n > host_limit:
        raise SizeLimitError(f"host has {host.n} vertices, limit {host_limit}")


def _search_order(pattern: SimpleGraph) -> list[int]:
    # BFS from the highest-degree vertex of each component so each vertex after
    # the first has an already-placed neighbour when possible.
    adj = pattern.adjacency()
    order: list[int] = []
    placed = set()
    for root in sorted(range(pattern.n), key=lambda v: -len(adj[v])):
        if root in placed:
            continue
        placed.add(root)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(adj[u], key=lambda v: -len(adj[v])):
                if w not in placed:
                    placed.add(w)
                    queue.append(w)
    return order


def find_subgraph(host: SimpleGraph, pattern: SimpleGraph, candidates=None) -> dict | None:
    """Injective map pattern -> host preserving pattern edges, or ``None``.

    ``candidates[x]``, if given, restricts the host vertices allowed for ``x``.
    """
    hadj = host.adjacency()
    padj = pattern.adjacency()
    order = _search_order(pattern)
    if candidates is None:
        candidates = {x: range(host.n) for x in range(pattern.n)}
    candidates = {x: [v for v in candidates[x] if len(hadj[v]) >= len(padj[x])] for x in range(pattern.n)}
    pos = {x: i for i, x in enumerate(order)}
    back = [[y for y in padj[x] if pos[y] < pos[x]] for x in order]
    image: dict[int, int] = {}
    used = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        x = order[i]
        for v in candidates[x]:
            if v in used or any(image[y] not in hadj[v] for y in back[i]):
                continue
            image[x] = v
            used.add(v)
            if extend(i + 1):
                return True
            used.discard(v)
            del image[x]
        return False

    return dict(image) if extend(0) else None


def contains_subgraph(host: SimpleGraph, pattern: SimpleGraph, *,
                      pattern_limit: int = DEFAULT_PATTERN_LIMIT,
                      host_limit: int = DEFAULT_HOST_LIMIT) -> bool:
    _check_limits(host, pattern, pattern_limit, host_limit)
    if pattern.n > host.n or len(pattern.edges) > len(host.edges):
        return False
    return find_subgraph(host, pattern) is not None


def has_correctly_colored_subgraph(host: SimpleGraph, c: Coloring, pattern: SimpleGraph, *,
                                   pattern_limit: int = DEFAULT_PATTERN_LIMIT,
                                   host_limit: int = DEFAULT_HOST_LIMIT) -> bool:
    """Is there an injection ``iota`` with ``c(iota(x)) == x`` mapping pattern edges to host edges?

    Pattern vertex ``x`` is identified with label ``c.pattern_vertices[x]``.
    """
    if len(c) != host.n:
        raise GraphError("coloring length does not match host")
    if len(c.pattern_vertices) != pattern.n:
        raise GraphError("coloring labels do not match the pattern vertices")
    # distinct labels make the map injective automatically
    _check_limits(host, pattern, pattern_limit, max(host_limit, host.n))
    cands = {x: c.preimage(lab) for x, lab in enumerate(c.pattern_vertices)}
    return find_subgraph(host, pattern, cands) is not None


# --------------------------------------------------------------------------
# Minor containment


def _is_connected_set(g: SimpleGraph, vertices) -> bool:
    vertices = set(vertices)
    if not vertices:
        return False
    adj = g.adjacency()
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w in vertices and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vertices


def _connected_partitions(nbr_mask: list[int], verts: list[int], k: int) -> Iterator[list[int]]:
    """Partitions of ``verts`` into exactly ``k`` blocks, each inducing a connected subgraph.

    Blocks are bitmasks. Vertices are assigned in order; a block that can no
    longer grow (no unassigned neighbour) must already be connected.
    """
    nv = len(verts)
    order_mask = [0] * (nv + 1)  # mask of verts[i:]
    for i in range(nv - 1, -1, -1):
        order_mask[i] = order_mask[i + 1] | (1 << verts[i])

    def connected(mask: int) -> bool:
        low = mask & -mask
        seen = low
        frontier = low
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            new = nbr_mask[b.bit_length() - 1] & mask & ~seen
            seen |= new
            frontier |= new
        return seen == mask

    blocks: list[int] = []

    def rec(i: int) -> Iterator[list[int]]:
        if nv - i < k - len(blocks):
            return
        if i == nv:
            if len(blocks) == k and all(connected(b) for b in blocks):
                yield list(blocks)
            return
        rest = order_mask[i + 1]
        bit = 1 << verts[i]
        for j in range(len(blocks)):
            old = blocks[j]
            blocks[j] = old | bit
            if _closed_ok(blocks, rest, connected):
                yield from rec(i + 1)
            blocks[j] = old
        if len(blocks) < k:
            blocks.append(bit)
            if _closed_ok(blocks, rest, connected):
                yield from rec(i + 1)
            blocks.pop()

    def _closed_ok(bl, rest, conn) -> bool:
        for b in bl:
            grow = 0
            m = b
            while m:
                low = m & -m
                m ^= low
                grow |= nbr_mask[low.bit_length() - 1]
            if not grow & rest and not conn(b):
                return False
        return True

    yield from rec(0)


def _quotient_contains(host_nbr: list[int], blocks: list[int], pattern: SimpleGraph) -> dict | None:
    """Bijection pattern vertices -> blocks realizing every pattern edge."""
    k = len(blocks)
    adj = [set() for _ in range(k)]
    reach = []
    for b in blocks:
        m, g = b, 0
        while m:
            low = m & -m
            m ^= low
            g |= host_nbr[low.bit_length() - 1]
        reach.append(g)
    for i in range(k):
        for j in range(i + 1, k):
            if reach[i] & blocks[j]:
                adj[i].add(j)
                adj[j].add(i)
    quotient = SimpleGraph(k, frozenset((i, j) for i in range(k) for j in adj[i] if i < j))
    if len(quotient.edges) < len(pattern.edges):
        return None
    return find_subgraph(quotient, pattern)


def find_minor(host: SimpleGraph, pattern: SimpleGraph, *,
               pattern_limit: int = DEFAULT_PATTERN_LIMIT,
               host_limit: int = DEFAULT_HOST_LIMIT) -> BranchDecomposition | None:
    """Search for branch sets of a ``pattern`` minor in ``host``.

    A model inside a host component can absorb every unused vertex of that
    component, so it suffices to split a chosen set of host components into
    connected blocks (as many blocks as pattern vertices in total) and test
    whether the quotient graph contains the pattern with a bijective map.
    """
    _check_limits(host, pattern, pattern_limit, host_limit)
    k = pattern.n
    if k == 0:
        return BranchDecomposition({})
    if k > host.n or len(pattern.edges) > len(host.edges):
        return None
    nbr = [0] * host.n
    for u, v in host.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    comps = host.components()

    # choose how many blocks each host component contributes (0 = unused)
    def splits(i: int, remaining: int) -> Iterator[list[int]]:
        if i == len(comps):
            if remaining == 0:
                yield []
            return
        for c in range(0, min(remaining, len(comps[i])) + 1):
            for rest in splits(i + 1, remaining - c):
                yield [c] + rest

    for counts in splits(0, k):
        parts = [list(_connected_partitions(nbr, comps[i], c)) if c else [[]]
                 for i, c in enumerate(counts)]
        if any(not p for p in parts):
            continue
        for blocks in _product(parts):
            image = _quotient_contains(nbr, blocks, pattern)
            if image is not None:
                sets = {x: frozenset(v for v in range(host.n) if blocks[image[x]] >> v & 1)
                        for x in range(k)}
                return BranchDecomposition(sets)
    return None


def _product(parts: list[list[list[int]]]) -> Iterator[list[int]]:
    if not parts:
        yield []
        return
    for head in parts[0]:
        for tail in _product(parts[1:]):
            yield head + tail


def contains_minor(host: SimpleGraph, pattern: SimpleGraph, **limits) -> bool:
    return find_minor(host, pattern, **limits) is not None
