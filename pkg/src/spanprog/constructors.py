"""Span programs and gadget graphs for st-connectivity and subgraph detection.

Colorings label host vertices with pattern vertices using the pattern's
canonical numbering (see :mod:`spanprog.graphs`): for a subdivided star the
root is 0 followed by the legs; for a triangle the labels are 0, 1, 2; for a
star with two subdivided legs ``v_1..v_k`` are ``0..k-1`` and the extra
leaves ``w_1..w_d`` are ``k..k+d-1``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .graphs import (Coloring, GraphError, MarkedGraph, SimpleGraph, k5_marked, random_coloring,
                     skew_product, star_leg_vertices, subdivided_star)
from .oracles import contains_minor
from .span import NegativeWitness, SpanProgram, evaluate, negative_witness_size


def pair_index(n: int) -> dict:
    """Variable index of every unordered vertex pair ``(u, v)``, ``u < v``, in lexicographic order."""
    return {e: i for i, e in enumerate(combinations(range(n), 2))}


def edge_assignment(g: SimpleGraph, pairs: dict | None = None) -> np.ndarray:
    """Adjacency-matrix input ``x``: one bit per vertex pair."""
    pairs = pair_index(g.n) if pairs is None else pairs
    x = np.zeros(len(pairs), dtype=int)
    for e in g.edges:
        x[pairs[e]] = 1
    return x


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _check_coloring(c: Coloring, g: SimpleGraph, labels: Sequence):
    if len(c) != g.n:
        raise GraphError("coloring length does not match the graph")
    if tuple(c.pattern_vertices) != tuple(labels):
        raise GraphError(f"coloring labels {c.pattern_vertices} do not match {tuple(labels)}")


# --------------------------------------------------------------------------
# st-connectivity


@dataclass(frozen=True)
class StConnInstance:
    program: SpanProgram
    s: int
    t: int
    pair_index: dict

    @property
    def n(self) -> int:
        return self.program.dim

    def assignment(self, g: SimpleGraph) -> np.ndarray:
        if g.n != self.n:
            raise GraphError("graph size does not match the instance")
        return edge_assignment(g, self.pair_index)


def stconn_program(n: int, s: int, t: int) -> StConnInstance:
    """Target ``e_t - e_s``; input ``e_u - e_v`` for every pair ``u < v``, available iff the edge is present."""
    if s == t:
        raise GraphError("st-connectivity needs s != t")
    if not (0 <= s < n and 0 <= t < n):
        raise GraphError("s, t out of range")
    pairs = pair_index(n)
    target = np.zeros(n)
    target[t], target[s] = 1.0, -1.0
    inputs = np.zeros((n, len(pairs)))
    for (u, v), j in pairs.items():
        inputs[u, j], inputs[v, j] = 1.0, -1.0
    idx = np.arange(len(pairs))
    prog = SpanProgram(target, np.zeros((n, 0)), inputs, idx, np.ones(len(pairs), dtype=int), len(pairs))
    return StConnInstance(prog, s, t, pairs)


@dataclass(frozen=True)
class PathInstance:
    instance: StConnInstance
    assignment: np.ndarray
    graph: SimpleGraph  # the derived graph H on n + 2 vertices; s = n, t = n + 1


def _labels_of(coloring, n: int, k: int) -> list[int]:
    labels = list(coloring.assignment if isinstance(coloring, Coloring) else coloring)
    if len(labels) != n:
        raise GraphError("coloring length does not match the graph")
    for lab in labels:
        if not (isinstance(lab, (int, np.integer)) and 0 <= lab <= k):
            raise GraphError(f"color {lab!r} outside 0..{k}")
    return [int(lab) for lab in labels]


def path_instance(g: SimpleGraph, k: int, coloring) -> PathInstance:
    """Color-coding reduction from length-``k`` path detection to st-connectivity.

    Colors are ``0..k``. ``H`` keeps the edges of ``g`` joining consecutive
    colors, joins ``s = n`` to color 0 and ``t = n + 1`` to color ``k``.
    """
    if k < 1:
        raise GraphError("path length must be >= 1")
    col = _labels_of(coloring, g.n, k)
    n = g.n
    s, t = n, n + 1
    edges = [e for e in g.edges if abs(col[e[0]] - col[e[1]]) == 1]
    edges += [(u, s) for u in range(n) if col[u] == 0]
    edges += [(u, t) for u in range(n) if col[u] == k]
    H = SimpleGraph(n + 2, frozenset(edges))
    inst = stconn_program(n + 2, s, t)
    return PathInstance(inst, inst.assignment(H), H)


def path_success_probability(k: int) -> float:
    return 2.0 * (k + 1) ** (-k - 1)


# --------------------------------------------------------------------------
# Gadget graphs


@dataclass(frozen=True)
class GadgetGraph:
    """Graph whose edges mirror available input vectors.

    ``edges`` lists every edge; ``paired`` holds pairs of edge indices that come
    from one four-term input vector; ``free`` holds indices of edges from free
    vectors.
    """

    labels: tuple
    edges: tuple
    paired: tuple
    free: tuple
    s: int = 0
    t: int = 1

    def __post_init__(self):
        in_pairs = [i for p in self.paired for i in p]
        if len(set(in_pairs)) != len(in_pairs) or any(len(p) != 2 for p in self.paired):
            raise GraphError("paired edges must come in disjoint 2-element groups")
        for i in in_pairs:
            if self.s in self.edges[i] or self.t in self.edges[i]:
                raise GraphError("s and t cannot carry paired edges")

    @property
    def n(self) -> int:
        return len(self.labels)

    def graph(self) -> SimpleGraph:
        return SimpleGraph(self.n, frozenset(self.edges))

    def index(self, label) -> int:
        return self.labels.index(label)

    def to_edge_list(self) -> str:
        """Edge-list text plus ``#paired i j`` and ``#free i`` lines (edge indices)."""
        lines = [f"{self.n} {len(self.edges)}"]
        lines += [f"{a} {b}" for a, b in self.edges]
        lines += [f"#paired {i} {j}" for i, j in self.paired]
        lines += [f"#free {i}" for i in self.free]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str, labels=None, s: int = 0, t: int = 1) -> "GadgetGraph":
        head, edges, paired, free = None, [], [], []
        for raw in text.splitlines():
            raw = raw.strip()
            if raw.startswith("#paired"):
                i, j = (int(tok) for tok in raw.split()[1:3])
                paired.append((i, j))
                continue
            if raw.startswith("#free"):
                free.append(int(raw.split()[1]))
                continue
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            a, b = (int(tok) for tok in line.split())
            if head is None:
                head = (a, b)
            else:
                edges.append((a, b))
        if head is None or len(edges) != head[1]:
            raise GraphError("malformed gadget edge list")
        labels = tuple(range(head[0])) if labels is None else tuple(labels)
        return cls(labels, tuple(edges), tuple(paired), tuple(free), s, t)


def _components_with(n: int, edges, start: int) -> set[int]:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


# --------------------------------------------------------------------------
# Subdivided stars


@dataclass(frozen=True)
class StarPattern:
    leg_lengths: tuple

    def __post_init__(self):
        object.__setattr__(self, "leg_lengths", tuple(int(x) for x in self.leg_lengths))
        if not self.leg_lengths or any(x < 1 for x in self.leg_lengths):
            raise GraphError("a star needs d >= 1 legs of positive length")

    @property
    def d(self) -> int:
        return len(self.leg_lengths)

    @property
    def n_vertices(self) -> int:
        return 1 + sum(self.leg_lengths)

    @property
    def labels(self) -> tuple:
        return tuple(range(self.n_vertices))

    def legs(self) -> list[list[int]]:
        """``legs()[j][i]`` is the pattern vertex at depth ``i+1`` on leg ``j+1``."""
        return star_leg_vertices(self.leg_lengths)

    def graph(self) -> SimpleGraph:
        return subdivided_star(*self.leg_lengths)

    def success_probability(self) -> float:
        return float(self.n_vertices) ** (-self.n_vertices)


@dataclass(frozen=True)
class StarInstance:
    program: SpanProgram
    gadget: GadgetGraph
    assignment: np.ndarray
    basis: dict  # ('s',) / ('t',) / (u, b) -> basis index
    paired_columns: tuple  # input column of each entry of gadget.paired


def _star_basis(T: StarPattern, c: Coloring) -> dict:
    basis = {("s",): 0, ("t",): 1}
    for u, lab in enumerate(c.assignment):
        copies = T.d + 1 if lab == 0 else 2
        for b in range(copies):
            basis[(u, b)] = len(basis)
    return basis


def star_program(T: StarPattern, c: Coloring, g: SimpleGraph) -> StarInstance:
    """Breadcrumb span program for a colored subdivided star, plus its gadget graph for ``g``."""
    _check_coloring(c, g, T.labels)
    basis = _star_basis(T, c)
    dim = len(basis)
    pairs = pair_index(g.n)
    legs = T.legs()
    d = T.d
    S, Tt = basis[("s",)], basis[("t",)]
    root = c.preimage(0)

    def vec(*terms):
        v = np.zeros(dim)
        for sign, key in terms:
            v[basis[key] if key in basis else key] += sign
        return v

    free, free_edges = [], []
    for u in root:
        free.append(vec((1, (u, 0)), (-1, S)))
        free_edges.append((S, basis[(u, 0)]))
        free.append(vec((1, Tt), (-1, (u, d))))
        free_edges.append((basis[(u, d)], Tt))
    for leg in legs:
        for u in c.preimage(leg[-1]):
            free.append(vec((1, (u, 1)), (-1, (u, 0))))
            free_edges.append((basis[(u, 0)], basis[(u, 1)]))

    inputs, ivars, col_edges = [], [], []
    for j, leg in enumerate(legs, start=1):
        for i in range(len(leg) - 1):
            for u in c.preimage(leg[i]):
                for up in c.preimage(leg[i + 1]):
                    var = pairs[_pair(u, up)]
                    inputs.append(vec((1, (up, 0)), (-1, (u, 0))))
                    ivars.append(var)
                    col_edges.append([(basis[(u, 0)], basis[(up, 0)])])
                    inputs.append(vec((1, (u, 1)), (-1, (up, 1))))
                    ivars.append(var)
                    col_edges.append([(basis[(up, 1)], basis[(u, 1)])])
        for u in root:
            for up in c.preimage(leg[0]):
                inputs.append(vec((1, (up, 0)), (-1, (u, j - 1)), (1, (u, j)), (-1, (up, 1))))
                ivars.append(pairs[_pair(u, up)])
                col_edges.append([(basis[(u, j - 1)], basis[(up, 0)]),
                                  (basis[(up, 1)], basis[(u, j)])])

    labels = tuple(("s",) if k == ("s",) else ("t",) if k == ("t",) else k for k in basis)
    prog = SpanProgram(np.eye(dim)[Tt] - np.eye(dim)[S],
                       np.array(free).T.reshape(dim, -1),
                       np.array(inputs).T.reshape(dim, -1),
                       np.array(ivars, dtype=int), np.ones(len(ivars), dtype=int),
                       len(pairs), labels)
    x = edge_assignment(g, pairs)
    avail = prog.available_mask(x)
    edges = list(free_edges)
    free_idx = list(range(len(free_edges)))
    paired, paired_cols = [], []
    for j, es in enumerate(col_edges):
        if not avail[j]:
            continue
        first = len(edges)
        edges.extend(es)
        if len(es) == 2:
            paired.append((first, first + 1))
            paired_cols.append(j)
    gadget = GadgetGraph(labels, tuple(edges), tuple(paired), tuple(free_idx), S, Tt)
    return StarInstance(prog, gadget, x, basis, tuple(paired_cols))


CONNECTED = "connected"


def star_hprime(T: StarPattern, c: Coloring, g: SimpleGraph, inst: StarInstance | None = None):
    """Build ``H'`` from ``H``: returns ``(edges of H', removed vertex set, added edges)``.

    Both rules are evaluated against ``H`` and applied together.
    """
    inst = star_program(T, c, g) if inst is None else inst
    basis = inst.basis
    H = inst.gadget
    n_h = H.n
    adj = [set() for _ in range(n_h)]
    for a, b in H.edges:
        adj[a].add(b)
        adj[b].add(a)
    legs = T.legs()
    root = c.preimage(0)
    R = [{basis[(u, j)] for u in root} for j in range(T.d + 1)]
    added, removed = [], set()
    for j, leg in enumerate(legs, start=1):
        colors = set(leg)
        Hj = {basis[(u, b)] for u in range(g.n) if c[u] in colors for b in (0, 1)}
        # components of H restricted to H_j, and which R sets each touches
        comp_of: dict[int, int] = {}
        touches: list[tuple[bool, bool]] = []
        for v in Hj:
            if v in comp_of:
                continue
            cid = len(touches)
            comp_of[v] = cid
            members, queue = [v], deque([v])
            while queue:
                a = queue.popleft()
                for b in adj[a]:
                    if b in Hj and b not in comp_of:
                        comp_of[b] = cid
                        members.append(b)
                        queue.append(b)
            nbrs = set().union(*(adj[a] for a in members))
            touches.append((bool(nbrs & R[j - 1]), bool(nbrs & R[j])))
        for v, cid in comp_of.items():
            if touches[cid][0] and touches[cid][1]:
                removed.add(v)
        for u in root:
            start = basis[(u, j - 1)]
            if adj[start] & R[j]:
                reach = True
            else:
                reach = any(touches[comp_of[b]][1] for b in adj[start] if b in Hj)
            if reach:
                added.append((start, basis[(u, j)]))
    edges = [e for e in H.edges if e[0] not in removed and e[1] not in removed] + added
    return edges, removed, added


def star_hprime_witness(T: StarPattern, c: Coloring, g: SimpleGraph):
    """Indicator witness from ``H'``: 1 on the component of ``t``, 0 elsewhere.

    Returns :data:`CONNECTED` when ``s`` and ``t`` are joined in ``H'``.
    """
    inst = star_program(T, c, g)
    edges, removed, _ = star_hprime(T, c, g, inst)
    H = inst.gadget
    t_side = _components_with(H.n, edges, H.t)
    if H.s in t_side:
        return CONNECTED
    wp = np.zeros(H.n)
    wp[sorted(t_side)] = 1.0
    return NegativeWitness(wp, negative_witness_size(inst.program, wp))


def star_forest_detect(components: Sequence[StarPattern], g: SimpleGraph, seed: int | None = None,
                       trials: int = 1, coloring: Coloring | None = None) -> bool:
    """Detect a disjoint union of subdivided stars with one shared coloring per trial.

    Component ``i``'s vertices get global labels offset by the sizes of the
    earlier components. Each trial accepts iff every component's program accepts
    on ``g`` restricted to the vertices carrying that component's labels.
    """
    components = [StarPattern(p.leg_lengths) if isinstance(p, StarPattern) else StarPattern(p)
                  for p in components]
    if not components:
        return True
    offsets = np.cumsum([0] + [p.n_vertices for p in components]).tolist()
    all_labels = tuple(range(offsets[-1]))
    colorings = [coloring] if coloring is not None else [
        random_coloring(g, all_labels, (seed or 0) + i) for i in range(trials)]
    for col in colorings:
        if _forest_trial(components, offsets, g, col):
            return True
    return False


def _forest_trial(components, offsets, g: SimpleGraph, col: Coloring) -> bool:
    for i, p in enumerate(components):
        lo, hi = offsets[i], offsets[i + 1]
        verts = [v for v in range(g.n) if lo <= col[v] < hi]
        if not verts:
            return False
        sub, _ = g.induced(verts)
        local = Coloring(p.labels, tuple(col[v] - lo for v in verts))
        inst = star_program(p, local, sub)
        if not evaluate(inst.program, inst.assignment):
            return False
    return True


@dataclass(frozen=True)
class ColoredExample:
    pattern: StarPattern
    coloring: Coloring
    graph: SimpleGraph


def incorrectly_colored_star_example() -> ColoredExample:
    """Star (1,3,1) inside a 7-vertex graph whose coloring hides it.

    ``s`` and ``t`` are joined in ``H`` but not in ``H'``, so the program rejects.
    """
    T = StarPattern((1, 3, 1))
    edges = [(0, 1), (0, 3), (1, 3), (1, 6), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (4, 6), (5, 6)]
    return ColoredExample(T, Coloring(T.labels, (4, 3, 0, 1, 0, 5, 2)), SimpleGraph.from_edges(7, edges))


def minor_only_star_example() -> ColoredExample:
    """Four legs of length 2 present only as a minor; the program still accepts.

    Roots 0 and 1 each carry two full legs; vertices 10 and 11 (colored like
    the first vertex of legs 3 and 4) touch both roots and let the witness
    shift weight from one root to the other.
    """
    T = StarPattern((2, 2, 2, 2))
    colors = (0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 5, 7)
    edges = [(0, 2), (2, 3), (0, 4), (4, 5), (1, 6), (6, 7), (1, 8), (8, 9),
             (0, 10), (1, 10), (0, 11), (1, 11)]
    return ColoredExample(T, Coloring(T.labels, colors), SimpleGraph.from_edges(12, edges))


# --------------------------------------------------------------------------
# Triangle


@dataclass(frozen=True)
class TriangleInstance:
    program: SpanProgram
    assignment: np.ndarray
    basis: dict  # ('s',), ('t',), (u, c(u)) and (u, 3) for color-0 u


TRIANGLE_SUCCESS_PROBABILITY = 2.0 / 9.0


def _triangle_basis(c: Coloring) -> dict:
    basis = {("s",): 0, ("t",): 1}
    for u, lab in enumerate(c.assignment):
        basis[(u, lab)] = len(basis)
        if lab == 0:
            basis[(u, 3)] = len(basis)
    return basis


def triangle_program(c: Coloring, g: SimpleGraph) -> TriangleInstance:
    _check_coloring(c, g, (0, 1, 2))
    basis = _triangle_basis(c)
    dim = len(basis)
    pairs = pair_index(g.n)
    S, Tt = basis[("s",)], basis[("t",)]
    eye = np.eye(dim)
    free = [eye[Tt] - eye[S] + eye[basis[(u, 0)]] - eye[basis[(u, 3)]] for u in c.preimage(0)]
    inputs, ivars = [], []
    for j in range(3):
        for u in c.preimage(j):
            for up in c.preimage((j + 1) % 3):
                inputs.append(eye[basis[(up, j + 1)]] - eye[basis[(u, j)]])
                ivars.append(pairs[_pair(u, up)])
    prog = SpanProgram(eye[Tt] - eye[S], np.array(free).T.reshape(dim, -1),
                       np.array(inputs).T.reshape(dim, -1), np.array(ivars, dtype=int),
                       np.ones(len(ivars), dtype=int), len(pairs), tuple(basis))
    return TriangleInstance(prog, edge_assignment(g, pairs), basis)


def is_forest(g: SimpleGraph) -> bool:
    return len(g.edges) == g.n - len(g.components())


@dataclass(frozen=True)
class TriangleLevels:
    level: dict        # H' node (u, b) -> level
    depth_h: dict      # host vertex -> depth in H
    roots_h: dict      # host vertex -> root of its H component


def triangle_levels(c: Coloring, forest: SimpleGraph) -> TriangleLevels:
    if not is_forest(forest):
        raise GraphError("input graph has a cycle")
    adj = forest.adjacency()
    depth_g = {}
    for comp in forest.components():
        r = min(comp)
        depth_g[r] = 0
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in depth_g:
                    depth_g[w] = depth_g[u] + 1
                    queue.append(w)
    h_adj = [{w for w in adj[u] if c[w] != c[u]} for u in range(forest.n)]
    h = SimpleGraph(forest.n, frozenset((u, w) for u in range(forest.n) for w in h_adj[u] if u < w))
    depth_h, roots_h = {}, {}
    for comp in h.components():
        r = min(comp, key=lambda v: (depth_g[v], v))
        depth_h[r] = 0
        roots_h[r] = r
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for w in h_adj[u]:
                if w not in depth_h:
                    depth_h[w] = depth_h[u] + 1
                    roots_h[w] = r
                    queue.append(w)

    def node(u: int, towards: int) -> tuple[int, int]:
        if c[u] != 0:
            return (u, c[u])
        return (u, 0) if c[towards] == 1 else (u, 3)

    hp_adj: dict = {}
    for u in range(forest.n):
        nodes = [(u, 0), (u, 3)] if c[u] == 0 else [(u, c[u])]
        for nd in nodes:
            hp_adj.setdefault(nd, [])
        if c[u] == 0:
            hp_adj[(u, 0)].append(((u, 3), -1))
            hp_adj[(u, 3)].append(((u, 0), +1))
    for u, w in h.edges:
        a, b = node(u, w), node(w, u)
        hp_adj[a].append((b, 0))
        hp_adj[b].append((a, 0))
    level = {}
    for r in set(roots_h.values()):
        start = (r, 0) if c[r] == 0 else (r, c[r])
        level[start] = 0
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b, step in hp_adj[a]:
                if b not in level:
                    level[b] = level[a] + step
                    queue.append(b)
    return TriangleLevels(level, depth_h, roots_h)


def triangle_negative_witness(c: Coloring, forest: SimpleGraph) -> NegativeWitness:
    """Level-function witness for a forest: ``<t|w'> = 0``, ``<s|w'> = -1``, node ``v`` gets ``-level(v)``.

    With this sign ``<w', t - s> = 1`` and ``<(u,0)|w'> - <(u,3)|w'> = -1``.
    """
    inst = triangle_program(c, forest)
    lv = triangle_levels(c, forest)
    wp = np.zeros(inst.program.dim)
    wp[inst.basis[("s",)]] = -1.0
    for nd, lev in lv.level.items():
        wp[inst.basis[nd]] = -float(lev)
    return NegativeWitness(wp, negative_witness_size(inst.program, wp))


# --------------------------------------------------------------------------
# Star with two subdivided legs


@dataclass(frozen=True)
class TwoLegStar:
    k: int    # path v_1..v_k
    hub: int  # the hub is v_hub
    d: int    # leaves w_1..w_d attached to the hub

    def __post_init__(self):
        if not 2 <= self.hub <= self.k - 1:
            raise GraphError("hub index must lie in 2..k-1")
        if self.d < 1:
            raise GraphError("need at least one extra leaf")

    @property
    def n_vertices(self) -> int:
        return self.k + self.d

    @property
    def labels(self) -> tuple:
        return tuple(range(self.n_vertices))

    def graph(self) -> SimpleGraph:
        edges = [(j, j + 1) for j in range(self.k - 1)]
        edges += [(self.hub - 1, self.k + i) for i in range(self.d)]
        return SimpleGraph(self.n_vertices, frozenset(edges))

    def success_probability(self) -> float:
        return float(self.n_vertices) ** (-self.n_vertices)


@dataclass(frozen=True)
class TwoLegInstance:
    program: SpanProgram
    assignment: np.ndarray
    graph: SimpleGraph        # H with the edges present for g (free edges included)
    labels: tuple             # H vertex names
    possible_edges: tuple     # (a, b, var or None for free)
    s: int = 0
    t: int = 1


def two_leg_gadget(T: TwoLegStar, col: Sequence[int]) -> tuple[list, list]:
    """Vertex names and possible edges ``(a, b, (u, v) or None)`` of the derived graph ``H``.

    ``col[u]`` is the pattern label of host vertex ``u``. An edge carrying a
    host pair is present iff that pair is an edge of the host; ``None`` marks
    a free edge. Naming is described in :func:`two_leg_star_instance`.
    """
    k, hub, d = T.k, T.hub, T.d
    h_lab = hub - 1
    n = len(col)
    classes: list[list[int]] = [[] for _ in range(T.n_vertices)]
    for u, lab in enumerate(col):
        classes[lab].append(u)
    hubs = classes[h_lab]
    names = [("s",), ("t",)]
    v_in = [0] * n   # H vertex entered from the previous path label
    v_out = [0] * n  # H vertex left towards the next path label
    for u in range(n):
        if col[u] < k and col[u] != h_lab:
            v_in[u] = v_out[u] = len(names)
            names.append(("v", u))
    hub_base = {}
    for u in hubs:
        hub_base[u] = len(names)
        v_in[u], v_out[u] = len(names), len(names) + d
        names += [("h", u, i) for i in range(d + 1)]
    leaf_of = {}
    for mu in range(n):
        if col[mu] >= k:
            for u in hubs:
                leaf_of[mu, u] = len(names)
                names.append(("w", mu, u))

    possible = [(0, v_in[u], None) for u in classes[0]]
    possible += [(v_out[u], 1, None) for u in classes[k - 1]]
    for j in range(1, k):  # pattern edge v_j - v_{j+1}
        for u in classes[j - 1]:
            for up in classes[j]:
                possible.append((v_out[u], v_in[up], (u, up) if u < up else (up, u)))
    for u in hubs:
        base = hub_base[u]
        for i in range(1, d + 1):
            for mu in classes[k + i - 1]:
                w = leaf_of[mu, u]
                pair = (u, mu) if u < mu else (mu, u)
                possible.append((base + i - 1, w, pair))
                possible.append((w, base + i, pair))
    return names, possible


def two_leg_star_instance(T: TwoLegStar, c: Coloring, g: SimpleGraph) -> TwoLegInstance:
    """Derived st-connectivity graph ``H``: hub vertices split into ``d+1`` copies,
    leaf-colored vertices copied once per hub-colored vertex.

    H vertex names: ``('s',)``, ``('t',)``, ``('v', u)`` for path-colored non-hub
    ``u``, ``('h', u, i)`` for hub copies, ``('w', mu, u)`` for leaf copies.
    """
    _check_coloring(c, g, T.labels)
    pairs = pair_index(g.n)
    names, gadget = two_leg_gadget(T, c.assignment)
    possible = [(a, b, None if e is None else pairs[e]) for a, b, e in gadget]
    dim = len(names)
    eye = np.eye(dim)
    free = [eye[b] - eye[a] for a, b, var in possible if var is None]
    inputs = [(eye[b] - eye[a], var) for a, b, var in possible if var is not None]
    prog = SpanProgram(eye[1] - eye[0], np.array(free).T.reshape(dim, -1),
                       np.array([v for v, _ in inputs]).T.reshape(dim, -1),
                       np.array([var for _, var in inputs], dtype=int),
                       np.ones(len(inputs), dtype=int), len(pairs), tuple(names))
    x = edge_assignment(g, pairs)
    present = [(a, b) for a, b, var in possible if var is None or x[var]]
    H = SimpleGraph(dim, frozenset(present))
    return TwoLegInstance(prog, x, H, tuple(names), tuple(possible))


def two_leg_counts(T: TwoLegStar, class_sizes: Sequence[int]) -> tuple[int, int]:
    """Vertex and possible-edge counts of ``H`` given ``|c^{-1}(v)|`` for each pattern vertex."""
    k, hub, d = T.k, T.hub, T.d
    sz = list(class_sizes)
    h = sz[hub - 1]
    w_total = sum(sz[k:])
    n_vertices = 2 + sum(sz[j] for j in range(k) if j != hub - 1) + h * (d + 1) + w_total * h
    n_edges = sz[0] + sz[k - 1] + sum(sz[j] * sz[j + 1] for j in range(k - 1)) + 2 * h * w_total
    return n_vertices, n_edges


# --------------------------------------------------------------------------
# The K5 skew-product counterexample


@dataclass(frozen=True)
class SkewReport:
    pattern: SimpleGraph
    lift: SimpleGraph
    contains_minor: bool
    lifted_edge_counts: dict  # pattern edge -> number of lifted edges between its two color classes

    @property
    def every_edge_doubled(self) -> bool:
        return all(cnt == 2 for cnt in self.lifted_edge_counts.values())


def skew_minor_check(t: MarkedGraph) -> SkewReport:
    """Does the skew product contain the base graph as a minor, and does the doubled
    coloring (both lifts of ``v`` colored ``v``) realize each base edge exactly twice?"""
    lift = skew_product(t)
    color = [v for i in (0, 1) for v in range(t.base.n)]
    counts = {e: 0 for e in t.base.edge_list()}
    for a, b in lift.edges:
        counts[_pair(color[a], color[b])] += 1
    return SkewReport(t.base, lift, contains_minor(lift, t.base), counts)


def k5_counterexample_check() -> SkewReport:
    return skew_minor_check(k5_marked())


def uniform_lift_certificate(t: MarkedGraph) -> np.ndarray:
    """Weights 1/2 on every lifted edge: projecting ``(v, i) -> v`` sends the
    weighted lifted edge vectors back to the base edge vectors."""
    lift = skew_product(t)
    n = t.base.n
    total = np.zeros((n, n))
    for a, b in lift.edges:
        u, v = a % n, b % n
        total[u, v] += 0.5
        total[v, u] += 0.5
    return total


def doubled_coloring(t: MarkedGraph) -> Coloring:
    n = t.base.n
    return Coloring(tuple(range(n)), tuple(v for i in (0, 1) for v in range(n)))


def skew_vertex_label(t: MarkedGraph, index: int) -> tuple[int, int]:
    n = t.base.n
    return (index % n, index // n)


__all__ = [
    "CONNECTED", "ColoredExample", "GadgetGraph", "PathInstance", "SkewReport", "StConnInstance", "StarInstance",
    "StarPattern", "TRIANGLE_SUCCESS_PROBABILITY", "TriangleInstance", "TriangleLevels",
    "TwoLegInstance", "TwoLegStar", "doubled_coloring",
    "edge_assignment", "incorrectly_colored_star_example", "is_forest", "k5_counterexample_check", "minor_only_star_example", "pair_index", "path_instance",
    "path_success_probability", "skew_minor_check", "skew_vertex_label",
    "star_forest_detect", "star_hprime", "star_hprime_witness", "star_program", "stconn_program",
    "triangle_levels", "triangle_negative_witness", "triangle_program", "two_leg_counts",
    "two_leg_gadget", "two_leg_star_instance", "uniform_lift_certificate",
]
