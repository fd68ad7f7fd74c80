"""Simple graphs, pattern generators, skew products, colorings and k-wise hashing.

Vertex numbering conventions used throughout the package:

* ``path(k)`` has ``k`` edges and vertices ``0..k`` in order.
* ``subdivided-star(l1, ..., ld)`` has the root at 0, then the vertices of
  leg 1 from the root outwards, then leg 2, and so on.
* ``complete-bipartite(m, n)`` puts the ``m`` side first.
* In a skew product the vertex ``(v, i)`` gets index ``i * n + v``.

Randomness always comes from numpy's PCG64 generator
(``numpy.random.default_rng(seed)``) so that a seed fully determines a result.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Hashable, Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class ParseError(GraphError):
    """Base class for edge-list parse failures; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedLineError(ParseError):
    pass


class VertexRangeError(ParseError):
    pass


class DuplicateEdgeError(ParseError):
    pass


class SelfLoopError(ParseError):
    pass


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("vertex count must be nonnegative")
        normed = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge {e} out of range for n={self.n}")
            normed.add(_norm(int(u), int(v)))
        object.__setattr__(self, "edges", frozenset(normed))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        edges = list(edges)
        seen = set()
        for u, v in edges:
            e = _norm(u, v)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
        return cls(n, frozenset(edges))

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edges

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def induced(self, vertices: Sequence[int]) -> tuple["SimpleGraph", list[int]]:
        """Induced subgraph on ``vertices``, relabelled ``0..len-1`` in the given order."""
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return SimpleGraph(len(vertices), frozenset(edges)), list(vertices)

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * self.n
        comps = []
        for root in range(self.n):
            if seen[root]:
                continue
            seen[root] = True
            comp, stack = [root], [root]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def disjoint_union(self, other: "SimpleGraph") -> "SimpleGraph":
        shifted = [(u + self.n, v + self.n) for u, v in other.edges]
        return SimpleGraph(self.n + other.n, self.edges | frozenset(shifted))


@dataclass(frozen=True)
class MarkedGraph:
    base: SimpleGraph
    mark: dict

    def __post_init__(self):
        marks = {_norm(*e): int(s) % 2 for e, s in self.mark.items()}
        if set(marks) != set(self.base.edges):
            raise GraphError("marks must be defined on exactly the edge set")
        object.__setattr__(self, "mark", marks)

    def __hash__(self):
        return hash((self.base, tuple(sorted(self.mark.items()))))


@dataclass(frozen=True)
class Coloring:
    """Map from host vertices to pattern-vertex labels.

    ``assignment[v]`` is the label of host vertex ``v``. Labels are usually the
    integers ``0..|V_T|-1`` of the pattern's canonical numbering.
    """

    pattern_vertices: tuple
    assignment: tuple

    def __post_init__(self):
        object.__setattr__(self, "pattern_vertices", tuple(self.pattern_vertices))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        labels = set(self.pattern_vertices)
        if len(labels) != len(self.pattern_vertices):
            raise GraphError("duplicate pattern labels")
        for lab in self.assignment:
            if lab not in labels:
                raise GraphError(f"label {lab!r} is not a pattern vertex")

    def __len__(self):
        return len(self.assignment)

    def __getitem__(self, v: int):
        return self.assignment[v]

    def preimage(self, label: Hashable) -> list[int]:
        return [v for v, lab in enumerate(self.assignment) if lab == label]


# --------------------------------------------------------------------------
# Edge-list text format


def parse_edge_list(text: bytes | str) -> SimpleGraph:
    """Parse the ``n m`` header + ``u v`` lines format. ``#`` starts a comment."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise MalformedLineError("missing 'n m' header")
    lineno, header = rows[0]
    try:
        n, m = (int(tok) for tok in header)
    except ValueError:
        raise MalformedLineError("header must be two integers 'n m'", lineno) from None
    if n < 0 or m < 0:
        raise MalformedLineError("negative sizes in header", lineno)
    body = rows[1:]
    if len(body) != m:
        raise MalformedLineError(f"header declares {m} edges, found {len(body)}", lineno)
    seen = set()
    for lineno, toks in body:
        if len(toks) != 2:
            raise MalformedLineError("expected 'u v'", lineno)
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise MalformedLineError("endpoints must be integers", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(f"vertex out of range [0, {n})", lineno)
        if u == v:
            raise SelfLoopError(f"self-loop at {u}", lineno)
        e = _norm(u, v)
        if e in seen:
            raise DuplicateEdgeError(f"duplicate edge {e}", lineno)
        seen.add(e)
    return SimpleGraph(n, frozenset(seen))


def serialize_edge_list(g: SimpleGraph) -> str:
    lines = [f"{g.n} {len(g.edges)}"]
    lines += [f"{u} {v}" for u, v in g.edge_list()]
    return "\n".join(lines) + "\n"


def parse_coloring(text: bytes | str, n: int | None = None) -> list[str]:
    """Read a coloring file: one ASCII token per line, line ``i`` for vertex ``i``."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    tokens = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split()[0])
    if n is not None and len(tokens) != n:
        raise GraphError(f"coloring has {len(tokens)} entries, graph has {n} vertices")
    return tokens


# --------------------------------------------------------------------------
# Named patterns


def complete(n: int) -> SimpleGraph:
    if n <= 0:
        raise GraphError("complete(n) needs n >= 1")
    return SimpleGraph(n, frozenset(combinations(range(n), 2)))


def complete_bipartite(m: int, n: int) -> SimpleGraph:
    if m <= 0 or n <= 0:
        raise GraphError("complete-bipartite sizes must be positive")
    return SimpleGraph(m + n, frozenset((i, m + j) for i in range(m) for j in range(n)))


def path(k: int) -> SimpleGraph:
    """Path with ``k`` edges on vertices ``0..k``."""
    if k <= 0:
        raise GraphError("path(k) needs k >= 1")
    return SimpleGraph(k + 1, frozenset((i, i + 1) for i in range(k)))


def star_leg_vertices(legs: Sequence[int]) -> list[list[int]]:
    """Vertex indices of each leg of ``subdivided_star(legs)``, root side first."""
    out, nxt = [], 1
    for length in legs:
        out.append(list(range(nxt, nxt + length)))
        nxt += length
    return out


def subdivided_star(*legs: int) -> SimpleGraph:
    if len(legs) == 1 and not isinstance(legs[0], int):
        legs = tuple(legs[0])
    if not legs or any(length <= 0 for length in legs):
        raise GraphError("subdivided star needs at least one leg, all lengths positive")
    edges = []
    for leg in star_leg_vertices(legs):
        prev = 0
        for v in leg:
            edges.append((prev, v))
            prev = v
    return SimpleGraph(1 + sum(legs), frozenset(edges))


def triangle() -> SimpleGraph:
    return complete(3)


_NAMED = re.compile(r"^\s*([a-zA-Z0-9_-]+)\s*(?:\(([^)]*)\))?\s*$")


def generate_named(kind: str) -> SimpleGraph:
    """Build a pattern from a descriptor such as ``"path(3)"`` or ``"subdivided-star(1,3,1)"``."""
    m = _NAMED.match(kind)
    if not m:
        raise GraphError(f"cannot parse pattern descriptor {kind!r}")
    name = m.group(1).lower()
    try:
        args = [int(a) for a in m.group(2).split(",")] if m.group(2) else []
    except ValueError:
        raise GraphError(f"non-integer size in {kind!r}") from None
    if name == "complete" and len(args) == 1:
        return complete(*args)
    if name == "complete-bipartite" and len(args) == 2:
        return complete_bipartite(*args)
    if name == "path" and len(args) == 1:
        return path(*args)
    if name == "subdivided-star" and args:
        return subdivided_star(*args)
    if name == "triangle" and not args:
        return triangle()
    if name == "k5" and not args:
        return complete(5)
    raise GraphError(f"unknown pattern descriptor {kind!r}")


# --------------------------------------------------------------------------
# Skew products over Z/2


def skew_product(t: MarkedGraph) -> SimpleGraph:
    """Double cover of ``t.base``: edge (u, v) with mark s lifts to ((u,i),(v,i+s))."""
    n = t.base.n
    edges = []
    for (u, v), s in t.mark.items():
        for i in (0, 1):
            edges.append((i * n + u, ((i + s) % 2) * n + v))
    return SimpleGraph(2 * n, frozenset(edges))


def skew_vertex(t: MarkedGraph, v: int, i: int) -> int:
    return (i % 2) * t.base.n + v


# Marks on K5 whose skew product is planar (hence K5-minor-free). Edges marked 1
# are those of the 5-cycle 0-2-4-1-3-0; every other edge is marked 0.
K5_SKEW_MARKS = {
    (0, 1): 0, (0, 2): 1, (0, 3): 1, (0, 4): 0, (1, 2): 0,
    (1, 3): 1, (1, 4): 1, (2, 3): 0, (2, 4): 1, (3, 4): 0,
}


def k5_marked() -> MarkedGraph:
    return MarkedGraph(complete(5), dict(K5_SKEW_MARKS))


# --------------------------------------------------------------------------
# Random graphs


def gnp(n: int, p: float, seed: int) -> SimpleGraph:
    """Erdos-Renyi graph: each pair independently with probability ``p``."""
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return SimpleGraph(n, frozenset(e for e, k in zip(pairs, keep) if k))


def random_forest(n: int, seed: int, attach: float = 0.9) -> SimpleGraph:
    """Vertex ``v >= 1`` joins a uniform earlier vertex with probability ``attach``."""
    rng = np.random.default_rng(seed)
    edges = []
    for v in range(1, n):
        if rng.random() < attach:
            edges.append((int(rng.integers(v)), v))
    return SimpleGraph(n, frozenset(edges))


def random_connected(n: int, p: float, seed: int) -> SimpleGraph:
    """Random spanning tree plus ``G(n, p)`` extra edges."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges = {_norm(int(perm[v]), int(perm[rng.integers(v)])) for v in range(1, n)}
    for e in combinations(range(n), 2):
        if rng.random() < p:
            edges.add(e)
    return SimpleGraph(n, frozenset(edges))


# --------------------------------------------------------------------------
# Colorings


def random_coloring(g: SimpleGraph | int, pattern_vertices: Sequence, seed: int) -> Coloring:
    """Uniform independent labels per vertex from PCG64 seeded with ``seed``."""
    labels = tuple(pattern_vertices)
    if not labels:
        raise GraphError("need at least one label")
    n = g if isinstance(g, int) else g.n
    rng = np.random.default_rng(seed)
    idx = rng.integers(len(labels), size=n)
    return Coloring(labels, tuple(labels[i] for i in idx))


# --------------------------------------------------------------------------
# GF(2^m) and the polynomial k-wise independent family


def _gf2_poly_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


@lru_cache(maxsize=None)
def irreducible_poly(m: int) -> int:
    """Lexicographically least irreducible polynomial of degree ``m`` over GF(2), as a bitmask."""
    if m < 1:
        raise GraphError("field exponent must be >= 1")
    for cand in range(1 << m, 1 << (m + 1)):
        if all(_gf2_poly_mod(cand, d) for deg in range(1, m // 2 + 1)
               for d in range(1 << deg, 1 << (deg + 1))):
            return cand
    raise AssertionError("unreachable")


def gf_mul(a: int, b: int, m: int) -> int:
    poly = irreducible_poly(m)
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return out


def _log2_exact(x: int, what: str) -> int:
    if x < 1 or x & (x - 1):
        raise GraphError(f"{what} must be a power of two, got {x}")
    return x.bit_length() - 1


@dataclass(frozen=True)
class KWiseHash:
    """``h(a)`` = low ``log2 ell`` bits of ``sum_i coeffs[i] * a^i`` evaluated in GF(n)."""

    n: int
    ell: int
    k: int
    coeffs: tuple

    def __post_init__(self):
        _log2_exact(self.n, "n")
        _log2_exact(self.ell, "ell")
        if self.ell > self.n:
            raise GraphError("ell must not exceed n")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if len(self.coeffs) != self.k or self.k < 1:
            raise GraphError("need exactly k >= 1 coefficients")
        if any(not 0 <= c < self.n for c in self.coeffs):
            raise GraphError("coefficients must be field elements")

    @classmethod
    def from_seed(cls, n: int, ell: int, k: int, seed: int) -> "KWiseHash":
        rng = np.random.default_rng(seed)
        return cls(n, ell, k, tuple(int(c) for c in rng.integers(n, size=k)))

    def __call__(self, a: int) -> int:
        return khash_eval(self, a)


def khash_eval(h: KWiseHash, a: int) -> int:
    if not 0 <= a < h.n:
        raise GraphError(f"hash argument {a} outside [0, {h.n})")
    m = _log2_exact(h.n, "n")
    acc = 0
    for c in reversed(h.coeffs):
        acc = (gf_mul(acc, a, m) if m else 0) ^ c
    return acc & (h.ell - 1)


def hash_coloring(g: SimpleGraph | int, pattern_vertices: Sequence, h: KWiseHash) -> tuple[Coloring | None, list[int]]:
    """Color vertex ``v`` by ``pattern_vertices[h(v)]``.

    Hash values beyond the label count leave the vertex uncolored; returns the
    coloring restricted to colored vertices (``None`` if there are none) and
    the list of those vertices.
    """
    labels = tuple(pattern_vertices)
    n = g if isinstance(g, int) else g.n
    if n > h.n:
        raise GraphError("hash domain smaller than the vertex set")
    keep, assignment = [], []
    for v in range(n):
        c = h(v)
        if c < len(labels):
            keep.append(v)
            assignment.append(labels[c])
    if not keep:
        return None, keep
    return Coloring(labels, tuple(assignment)), keep
