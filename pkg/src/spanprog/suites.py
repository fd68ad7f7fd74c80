"""Invariant suites run by ``spanprog verify``.

Each suite returns a :class:`SuiteResult` listing named checks; the suite
passes iff every check passes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import layered as lay
from .constructors import StarPattern, k5_counterexample_check, skew_minor_check, stconn_program
from .graphs import (MarkedGraph, SimpleGraph, complete, gnp, path, random_coloring, random_connected,
                     subdivided_star, triangle)
from .oracles import contains_subgraph, effective_resistance, find_minor, is_connected
from .span import evaluate, positive_witness
from .walk import (ReflectionSystem, effective_gap_check, random_reflection_system,
                   spectral_decompose_product)

SUITES = ("spectral", "gap", "factorization", "k5", "oracles")


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)  # (name, ok, details)

    def add(self, name: str, ok: bool, **details):
        self.checks.append((name, bool(ok), details))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.name, "ok": self.ok,
                "checks": [{"name": n, "ok": ok, **d} for n, ok, d in self.checks]}


def sample_reflection_system(rng) -> ReflectionSystem:
    """Random system in dimension 2..24 with planted shared and mutually orthogonal directions."""
    dim = int(rng.integers(2, 25))
    shared = int(rng.integers(0, dim // 3 + 1))
    shared_perp = int(rng.integers(0, (dim - shared) // 3 + 1))
    room = dim - shared - shared_perp
    ka = shared + int(rng.integers(0, room + 1))
    kb = shared + int(rng.integers(0, room + 1))
    return random_reflection_system(dim, ka, kb, rng, shared, shared_perp)


def spectral(seed: int = 0, count: int = 200) -> SuiteResult:
    res = SuiteResult("spectral")
    theta = 0.3
    rot = ReflectionSystem(np.array([[1.0], [0.0]]), np.array([[np.cos(theta)], [np.sin(theta)]]))
    dec, chk = spectral_decompose_product(rot)
    res.add("rotation-2d", chk.ok and np.allclose(dec.eigenphases, [-2 * theta, 2 * theta]),
            eigenphases=[float(v) for v in dec.eigenphases])
    rng = np.random.default_rng(seed)
    worst, failures = 0.0, 0
    for _ in range(count):
        _, chk = spectral_decompose_product(sample_reflection_system(rng))
        worst = max(worst, chk.phase_error)
        failures += not chk.ok
    res.add("random-systems", failures == 0, systems=count, failures=failures, max_phase_error=worst)
    return res


def _family_instance(family: str, n: int, seed: int):
    """A layered instance of the given family with ``n`` slots per layer (d = 3 for st-connectivity)."""
    g = gnp(n, 0.5, seed)
    alpha = 2.0
    if family == "stconn":
        return lay.layered_stconn(g, 0, n - 1, alpha, d=3)
    if family == "star":
        T = StarPattern((1, 2))
        return lay.layered_star(T, random_coloring(g, T.labels, seed), g, alpha)
    return lay.layered_triangle(random_coloring(g, (0, 1, 2), seed), g, alpha)


def gap(seed: int = 0, count: int = 100, thetas=(0.1, 0.5), n_values=(2, 4, 8)) -> SuiteResult:
    res = SuiteResult("gap")
    rng = np.random.default_rng(seed)
    worst = {th: 0.0 for th in thetas}
    ok = True
    for i in range(count):
        rs = sample_reflection_system(rng)
        for th in thetas:
            chk = effective_gap_check(rs, th, trials=16, seed=seed + i)
            worst[th] = max(worst[th], chk.max_ratio / th, chk.exact_norm / th)
            ok &= chk.ok
    res.add("effective-gap", ok, systems=count,
            worst_ratio_over_theta={str(th): v for th, v in worst.items()})
    for family in ("stconn", "star", "triangle"):
        gaps = [lay.delta_gap(_family_instance(family, n, seed).spec) for n in n_values]
        same = max(gaps) - min(gaps) < 1e-9
        res.add(f"delta-gap-{family}", same and min(gaps) > 0, n_values=list(n_values), gaps=gaps)
    return res


def factorization(seed: int = 0, n_values=(2, 3, 5, 8)) -> SuiteResult:
    res = SuiteResult("factorization")
    for family in ("stconn", "star", "triangle"):
        worst, ranks_ok, delta_err = 0.0, True, 0.0
        for n in n_values:
            inst = _family_instance(family, n, seed + n)
            chk = lay.check_layered(inst)
            worst = max(worst, chk.max_residual)
            ranks_ok &= chk.ok
            Vp = inst.V * inst.scale
            delta_err = max(delta_err, float(np.abs(Vp @ Vp.T - inst.spec.matrix(inst.n)).max()))
            spectra = lay.block_spectrum(inst.spec, (2, 4, 6))
            ranks_ok &= all(s.agree for s in spectra)
        res.add(f"identity-{family}", ranks_ok and delta_err < 1e-10, max_residual=worst,
                delta_vs_spec=delta_err)
    return res


def k5() -> SuiteResult:
    res = SuiteResult("k5")
    rep = k5_counterexample_check()
    res.add("no-k5-minor", not rep.contains_minor)
    res.add("edges-doubled", rep.every_edge_doubled,
            counts={f"{u}-{v}": c for (u, v), c in sorted(rep.lifted_edge_counts.items())})
    tri_ok = all(skew_minor_check(MarkedGraph(triangle(), dict(zip(sorted(triangle().edges), marks))))
                 .contains_minor for marks in itertools.product((0, 1), repeat=3))
    res.add("triangle-lifts-contain-triangle", tri_ok)
    return res


def oracles(seed: int = 0) -> SuiteResult:
    res = SuiteResult("oracles")
    bad = 0
    for n in range(2, 5):
        pairs = list(itertools.combinations(range(n), 2))
        inst = stconn_program(n, 0, n - 1)
        for mask in range(1 << len(pairs)):
            g = _graph_from_mask(n, pairs, mask)
            bad += evaluate(inst.program, inst.assignment(g)) != is_connected(g, 0, n - 1)
    res.add("stconn-vs-bfs", bad == 0, mismatches=bad)
    worst = 0.0
    for i in range(20):
        n = 3 + i % 8
        g = random_connected(n, 0.3, seed + i)
        inst = stconn_program(n, 0, n - 1)
        size = positive_witness(inst.program, inst.assignment(g)).size
        worst = max(worst, abs(size - effective_resistance(g, 0, n - 1)))
    res.add("resistance-vs-witness", worst < 1e-6, max_error=worst)
    bad = 0
    patterns = [path(2), subdivided_star(1, 1, 1), triangle(), complete(4)]
    for i in range(30):
        g = gnp(7, 0.4, seed + i)
        for p in patterns:
            sub = contains_subgraph(g, p)
            dec = find_minor(g, p)
            bad += (sub and dec is None) or (dec is not None and not dec.is_valid(g, p))
    res.add("subgraph-implies-minor", bad == 0, violations=bad)
    return res


def _graph_from_mask(n, pairs, mask):
    return SimpleGraph(n, frozenset(e for b, e in enumerate(pairs) if mask >> b & 1))


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name == "spectral":
        return spectral(seed)
    if name == "gap":
        return gap(seed)
    if name == "factorization":
        return factorization(seed)
    if name == "k5":
        return k5()
    if name == "oracles":
        return oracles(seed)
    raise ValueError(f"unknown suite {name!r}")


