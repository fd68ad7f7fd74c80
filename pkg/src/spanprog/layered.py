"""Layered padding of the graph span programs and the factorization ``V' = A^T B``.

Every program is laid out on ``ell`` layers of ``n`` slots arranged in a
cycle; vertex ``(k, sigma)`` has index ``k * n + sigma``. Consecutive layers
are joined by all ``n^2`` slot pairs, either as two-term edge columns or, for
four-term vectors, as groups of two layer pairs sharing ``n^2`` columns.
Columns whose slots do not correspond to a real vector are fillers that are
never available. The pair closing the cycle joins the ``t`` layer to the
``s`` layer; its ``(t, s)`` slot holds the scaled target ``(t - s)/alpha``
together with a never-available column ``sqrt(1 - 1/alpha^2)(t - s)``.

With column ``j`` of the evaluator matrix ``V`` (target column first),
``b_j = V_j / ||V_j||`` and ``<a_i|j> = ||V_j|| / (2 sqrt(n))`` for each of its
vertices, so ``<a_i|j><i|b_j> = V_ij / (2 sqrt(n))`` and all ``a_i`` are unit
vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp

from .constructors import StarPattern, pair_index
from .graphs import Coloring, GraphError, SimpleGraph
from .span import SpanProgram
from .walk import ConfigError, ReflectionSystem

FREE = (0, 1)     # label of always-available columns (variable x0 = 1)
FILLER = (0, 0)   # label of never-available columns
SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class LayerBlockSpec:
    """``blocks[k][k']`` = ``(a, b)`` standing for ``a I_n + b J_n / n``."""

    ell: int
    a: np.ndarray  # ell x ell
    b: np.ndarray

    def __post_init__(self):
        for arr in (self.a, self.b):
            if arr.shape != (self.ell, self.ell):
                raise ConfigError("block coefficient arrays must be ell x ell")
            if not np.allclose(arr, arr.T, atol=1e-12):
                raise ConfigError("block spec is not symmetric")

    @property
    def blocks(self) -> list:
        return [[(float(self.a[i, j]), float(self.b[i, j])) for j in range(self.ell)]
                for i in range(self.ell)]

    def matrix(self, n: int) -> np.ndarray:
        return np.kron(self.a, np.eye(n)) + np.kron(self.b, np.ones((n, n)) / n)

    @classmethod
    def from_blocks(cls, blocks) -> "LayerBlockSpec":
        arr = np.asarray(blocks, dtype=float)
        return cls(arr.shape[0], arr[:, :, 0], arr[:, :, 1])


@dataclass(frozen=True)
class LayeredInstance:
    family: str
    ell: int
    n: int
    alpha: float
    program: SpanProgram        # padded program over ell * n vertices, x0 prepended
    V: np.ndarray               # [target / alpha | program inputs]
    rs: ReflectionSystem        # lifted A (vertices) and B (columns)
    spec: LayerBlockSpec
    slot_degree: np.ndarray     # number of distinct neighbour slots per vertex
    s: int
    t: int

    def assignment(self, x) -> np.ndarray:
        return np.concatenate([[1], np.asarray(x, dtype=int).reshape(-1)])

    @property
    def scale(self) -> float:
        return 1.0 / (2.0 * np.sqrt(self.n))


class _Layout:
    def __init__(self, ell: int, n: int, nvars: int, alpha: float):
        if alpha < 1:
            raise ConfigError("alpha must be >= 1")
        self.ell, self.n, self.nvars, self.alpha = ell, n, nvars, alpha
        self.cols: list[dict] = []
        self.labels: list[tuple[int, int]] = []
        self.a = np.zeros((ell, ell))
        self.b = np.zeros((ell, ell))
        self.slot_pairs: set = set()

    def v(self, k: int, sigma: int) -> int:
        return (k % self.ell) * self.n + sigma

    def _touch(self, u: int, w: int):
        self.slot_pairs.add((min(u, w), max(u, w)))

    def _block(self, k1, k2, a, b):
        k1, k2 = k1 % self.ell, k2 % self.ell
        if k1 == k2:
            self.a[k1, k1] += a
            self.b[k1, k1] += b
        else:
            self.a[k1, k2] += a
            self.a[k2, k1] += a
            self.b[k1, k2] += b
            self.b[k2, k1] += b

    def ordinary(self, k: int, label):
        """Columns ``|k+1, sigma'> - |k, sigma>``; ``label(sigma, sigma')`` gives ``(var, bit)``."""
        n = self.n
        for s1 in range(n):
            for s2 in range(n):
                u, w = self.v(k, s1), self.v(k + 1, s2)
                self.cols.append({w: 1.0, u: -1.0})
                self.labels.append(label(s1, s2))
                self._touch(u, w)
        self._block(k, k, 0.25, 0)
        self._block(k + 1, k + 1, 0.25, 0)
        self._block(k, k + 1, 0, -0.25)

    def paired(self, k1: int, k2: int, k3: int, k4: int, label):
        """Columns ``(-|k1,s> + |k2,s'> - |k3,s'> + |k4,s>)/sqrt(2)``."""
        n = self.n
        for s1 in range(n):
            for s2 in range(n):
                col = {self.v(k1, s1): -SQRT_HALF, self.v(k2, s2): SQRT_HALF,
                       self.v(k3, s2): -SQRT_HALF, self.v(k4, s1): SQRT_HALF}
                self.cols.append(col)
                self.labels.append(label(s1, s2))
                self._touch(self.v(k1, s1), self.v(k2, s2))
                self._touch(self.v(k3, s2), self.v(k4, s1))
        e = 1 / 8
        for k in (k1, k2, k3, k4):
            self._block(k, k, e, 0)
        self._block(k1, k2, 0, -e)
        self._block(k1, k3, 0, e)
        self._block(k1, k4, -e, 0)
        self._block(k2, k3, -e, 0)
        self._block(k2, k4, 0, e)
        self._block(k3, k4, 0, -e)

    def closing(self):
        """Pair from the ``t`` layer back to the ``s`` layer; returns the target column."""
        n, k = self.n, self.ell - 1
        s, t = self.v(0, 0), self.v(k, 0)
        target_col = {t: 1 / self.alpha, s: -1 / self.alpha}
        rest = np.sqrt(1 - 1 / self.alpha ** 2)
        for s1 in range(n):
            for s2 in range(n):
                u, w = self.v(k, s1), self.v(0, s2)
                if (u, w) == (t, s):
                    if rest > 0:
                        self.cols.append({t: rest, s: -rest})
                        self.labels.append(FILLER)
                else:
                    self.cols.append({u: 1.0, w: -1.0})
                    self.labels.append(FILLER)
                self._touch(u, w)
        self._block(k, k, 0.25, 0)
        self._block(0, 0, 0.25, 0)
        self._block(k, 0, 0, -0.25)
        return target_col

    def finish(self, family: str) -> LayeredInstance:
        N = self.ell * self.n
        target_col = self.closing()
        s, t = self.v(0, 0), self.v(self.ell - 1, 0)
        cols = [target_col] + self.cols
        m = len(cols)
        V = np.zeros((N, m))
        for j, col in enumerate(cols):
            for i, val in col.items():
                V[i, j] += val
        inputs = V[:, 1:]
        tau = np.zeros(N)
        tau[t], tau[s] = 1.0, -1.0
        labels = np.array(self.labels, dtype=int).reshape(-1, 2)
        prog = SpanProgram(tau, np.zeros((N, 0)), inputs, labels[:, 0], labels[:, 1], self.nvars)
        norms = np.linalg.norm(V, axis=0)
        sqrt_n = np.sqrt(self.n)
        rows, acols, avals, bvals, brows = [], [], [], [], []
        for j, col in enumerate(cols):
            for i, val in col.items():
                rows.append(i * m + j)
                acols.append(i)
                avals.append(norms[j] / (2 * sqrt_n))
                brows.append(j)
                bvals.append(val / norms[j])
        ambient = N * m
        A = sp.csc_matrix((avals, (rows, acols)), shape=(ambient, N))
        B = sp.csc_matrix((bvals, (rows, brows)), shape=(ambient, m))
        degree = np.zeros(N, dtype=int)
        for u, w in self.slot_pairs:
            degree[u] += 1
            degree[w] += 1
        spec = LayerBlockSpec(self.ell, self.a.copy(), self.b.copy())
        return LayeredInstance(family, self.ell, self.n, self.alpha, prog, V, ReflectionSystem(A, B),
                               spec, degree, s, t)


def _edge_label(pairs: dict, u: int, w: int) -> tuple[int, int]:
    return (1 + pairs[(min(u, w), max(u, w))], 1)


def layered_stconn(g: SimpleGraph, s: int, t: int, alpha: float, d: int | None = None) -> LayeredInstance:
    """``s`` layer, ``d + 1`` copies of ``V(g)`` joined by stay edges and graph edges, ``t`` layer."""
    n = g.n
    if n < 1 or s == t:
        raise GraphError("need s != t")
    d = n - 1 if d is None else d
    copies = d + 1
    pairs = pair_index(n)
    lay = _Layout(copies + 2, n, 1 + len(pairs), alpha)
    lay.ordinary(0, lambda a, b: FREE if (a, b) == (0, s) else FILLER)
    for k in range(1, copies):
        lay.ordinary(k, lambda a, b: FREE if a == b else _edge_label(pairs, a, b))
    lay.ordinary(copies, lambda a, b: FREE if (a, b) == (t, 0) else FILLER)
    return lay.finish("stconn")


def star_layer_count(T: StarPattern) -> int:
    return 2 + 2 * sum(x + 1 for x in T.leg_lengths)


def layered_star(T: StarPattern, c: Coloring, g: SimpleGraph, alpha: float) -> LayeredInstance:
    """Per leg: root copy out, leg vertices outward, leg vertices back, root copy back."""
    if tuple(c.pattern_vertices) != T.labels or len(c) != g.n:
        raise GraphError("coloring does not match the pattern or graph")
    n = g.n
    pairs = pair_index(n)
    col = c.assignment
    lay = _Layout(star_layer_count(T), n, 1 + len(pairs), alpha)

    def colored(a, b, ca, cb):
        if col[a] == ca and col[b] == cb and a != b:
            return _edge_label(pairs, a, b)
        return FILLER

    lay.ordinary(0, lambda a, b: FREE if a == 0 and col[b] == 0 else FILLER)
    k = 1
    legs = T.legs()
    for j, leg in enumerate(legs):
        L = len(leg)
        out0 = k                # R_j out
        back = k + 2 * L + 1    # R_j back
        lay.paired(out0, out0 + 1, back - 1, back, lambda a, b, v=leg[0]: colored(a, b, 0, v))
        for i in range(L - 1):
            lay.ordinary(out0 + 1 + i, lambda a, b, p=leg[i], q=leg[i + 1]: colored(a, b, p, q))
            lay.ordinary(back - 2 - i, lambda a, b, p=leg[i + 1], q=leg[i]: colored(a, b, p, q))
        lay.ordinary(out0 + L, lambda a, b, v=leg[-1]: FREE if a == b and col[a] == v else FILLER)
        if j + 1 < len(legs):
            lay.ordinary(back, lambda a, b: FREE if a == b and col[a] == 0 else FILLER)
        else:
            lay.ordinary(back, lambda a, b: FREE if col[a] == 0 and b == 0 else FILLER)
        k = back + 1
    assert k == lay.ell - 1
    return lay.finish("star")


def layered_triangle(c: Coloring, g: SimpleGraph, alpha: float) -> LayeredInstance:
    """Six layers: s, color 0 entering, color 1, color 2, color 0 leaving, t."""
    if tuple(c.pattern_vertices) != (0, 1, 2) or len(c) != g.n:
        raise GraphError("coloring must use labels 0, 1, 2")
    n = g.n
    pairs = pair_index(n)
    col = c.assignment
    lay = _Layout(6, n, 1 + len(pairs), alpha)
    lay.paired(0, 1, 4, 5, lambda a, b: FREE if a == 0 and col[b] == 0 else FILLER)
    for k, (p, q) in zip((1, 2, 3), ((0, 1), (1, 2), (2, 0))):
        lay.ordinary(k, lambda a, b, p=p, q=q: _edge_label(pairs, a, b)
                     if col[a] == p and col[b] == q and a != b else FILLER)
    return lay.finish("triangle")


def layered_factorization(family: str, alpha: float, **kw) -> LayeredInstance:
    """Dispatch on ``family`` in ``{'stconn', 'star', 'triangle'}``."""
    if family == "stconn":
        return layered_stconn(kw["graph"], kw["s"], kw["t"], alpha, kw.get("d"))
    if family == "star":
        return layered_star(kw["pattern"], kw["coloring"], kw["graph"], alpha)
    if family == "triangle":
        return layered_triangle(kw["coloring"], kw["graph"], alpha)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class FactorizationCheck:
    max_residual: float
    rank_V: int
    rank_Vp: int
    rank_joint: int

    @property
    def ok(self) -> bool:
        return self.max_residual <= 1e-10 and self.rank_V == self.rank_Vp == self.rank_joint


def factorization_identity_check(A, B, V: np.ndarray, n: int) -> FactorizationCheck:
    """Compare ``A^T B`` with ``V / (2 sqrt(n))`` entrywise, and their null spaces via ranks."""
    D = A.T @ B
    D = D.toarray() if sp.issparse(D) else np.asarray(D)
    Vp = V / (2 * np.sqrt(n))
    resid = float(np.abs(D - Vp).max(initial=0.0))
    rank = np.linalg.matrix_rank
    return FactorizationCheck(resid, int(rank(V)), int(rank(D)), int(rank(np.vstack([V, D]))))


def check_layered(inst: LayeredInstance) -> FactorizationCheck:
    return factorization_identity_check(inst.rs.A, inst.rs.B, inst.V, inst.n)


# --------------------------------------------------------------------------
# Block spectra


def _unique(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out: list[float] = []
    for v in np.sort(values):
        if not out or v - out[-1] > tol:
            out.append(float(v))
    return np.array(out)


@dataclass(frozen=True)
class BlockSpectrum:
    n: int
    reduced: np.ndarray          # distinct eigenvalues of A and A + B
    direct: np.ndarray | None    # distinct eigenvalues of the full matrix, when computed

    @property
    def agree(self) -> bool:
        if self.direct is None:
            return True
        return self.direct.shape == self.reduced.shape and bool(
            np.abs(self.direct - self.reduced).max(initial=0.0) < 1e-9)


def reduced_spectrum(spec: LayerBlockSpec) -> np.ndarray:
    ev = np.concatenate([np.linalg.eigvalsh(spec.a), np.linalg.eigvalsh(spec.a + spec.b)])
    return _unique(ev)


def block_spectrum(spec: LayerBlockSpec, n_values, direct_limit: int = 600) -> list[BlockSpectrum]:
    """Spectrum of ``A (x) I_n + B (x) J_n/n`` as a set, reduced and (when ``ell n`` is small) direct.

    ``J_n/n`` has eigenvalues 1 and, for ``n >= 2``, 0, so the set is
    ``eig(A) | eig(A + B)`` for every ``n >= 2``.
    """
    out = []
    reduced = reduced_spectrum(spec)
    for n in n_values:
        if n < 2:
            raise ConfigError("block spectra need n >= 2")
        direct = None
        if spec.ell * n <= direct_limit:
            direct = _unique(np.linalg.eigvalsh(spec.matrix(n)))
        out.append(BlockSpectrum(n, reduced, direct))
    return out


def delta_gap(spec: LayerBlockSpec, tol: float = 1e-9) -> float:
    ev = reduced_spectrum(spec)
    nonzero = ev[np.abs(ev) > tol]
    if nonzero.size == 0:
        raise ConfigError("all-zero spectrum")
    return float(np.abs(nonzero).min())


# --------------------------------------------------------------------------
# Witness-size bounds used to configure the evaluator


def stconn_bounds(n: int, d: int | None = None) -> tuple[float, float]:
    """(W1, W0): a path of length ``d`` and the indicator witness over all pairs."""
    d = n - 1 if d is None else d
    return float(d), 4.0 * comb(n, 2)


__all__ = [
    "BlockSpectrum", "FactorizationCheck", "LayerBlockSpec", "LayeredInstance", "block_spectrum",
    "check_layered", "delta_gap", "factorization_identity_check", "layered_factorization",
    "layered_star", "layered_stconn", "layered_triangle", "reduced_spectrum", "star_layer_count",
    "stconn_bounds",
]
