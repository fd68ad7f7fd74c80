"""Command-line front end: ``detect``, ``simulate`` and ``verify``.

Exit status: 0 when a decision (or passing suite) is produced, 1 on usage or
input errors, 2 when a verification suite finds a violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from math import ceil, comb
from typing import Callable

import numpy as np

from . import constructors as con
from .graphs import (Coloring, GraphError, KWiseHash, SimpleGraph, hash_coloring, parse_coloring,
                     parse_edge_list, path, random_coloring, triangle)
from .oracles import contains_minor, contains_subgraph, has_correctly_colored_subgraph, is_connected
from .span import (MEMBERSHIP_TOL, SpanProgram, canonicalize_free, evaluate, extend_assignment,
                   negative_witness, positive_witness)
from .suites import SUITES, run_suite
from .walk import ConfigError, EvaluatorConfig, run_evaluator

SCHEMA_VERSION = "1.0"
PROBLEMS = ("stconn", "path", "star", "star-forest", "triangle", "two-leg-star")
U64 = 1 << 64


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Piece:
    """One span program to evaluate; a trial accepts iff all its pieces accept."""

    program: SpanProgram
    x: np.ndarray
    W1: float
    W0: float

    def canonical(self) -> tuple[SpanProgram, np.ndarray]:
        if self.program.n_free == 0:
            return self.program, self.x
        return canonicalize_free(self.program), extend_assignment(self.x)


@dataclass(frozen=True)
class Problem:
    labels: tuple | None           # pattern labels to color with; None = no coloring
    success_probability: float
    pieces: Callable               # (graph, coloring) -> list[Piece] | None (None = trivial reject)
    pattern: SimpleGraph | None    # for oracle cross-checks
    hashable: bool = False


def _legs(text: str) -> tuple[int, ...]:
    try:
        legs = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"bad leg list {text!r}") from None
    return legs


def _star_pieces(T: con.StarPattern):
    def pieces(g, c):
        inst = con.star_program(T, c, g)
        canon_inputs = inst.program.n_inputs + inst.program.n_free
        return [Piece(inst.program, inst.assignment, 2.0 + 2 * sum(T.leg_lengths), 4.0 * canon_inputs)]
    return pieces


def _disjoint_union(graphs) -> SimpleGraph:
    out = SimpleGraph(0, frozenset())
    for g in graphs:
        out = out.disjoint_union(g)
    return out


def build_problem(args, n: int) -> Problem:
    kind = args.problem
    if kind == "stconn":
        if args.s is None or args.t is None:
            raise UsageError("stconn needs --s and --t")
        if args.s == args.t or not (0 <= args.s < n and 0 <= args.t < n):
            raise UsageError("need distinct s, t inside the graph")
        d = n - 1 if args.d is None else args.d
        inst = con.stconn_program(n, args.s, args.t)

        def pieces(g, c):
            return [Piece(inst.program, inst.assignment(g), float(max(d, 1)), 4.0 * comb(n, 2))]
        return Problem(None, 1.0, pieces, None)
    if kind == "path":
        if args.k is None or args.k < 1:
            raise UsageError("path needs --k >= 1")
        k = args.k

        def pieces(g, c):
            pi = con.path_instance(g, k, c)
            return [Piece(pi.instance.program, pi.assignment, float(k + 2), 4.0 * comb(g.n + 2, 2))]
        return Problem(tuple(range(k + 1)), con.path_success_probability(k), pieces, path(k))
    if kind == "star":
        if not args.legs or len(args.legs) != 1:
            raise UsageError("star needs exactly one --legs list")
        T = con.StarPattern(_legs(args.legs[0]))
        return Problem(T.labels, T.success_probability(), _star_pieces(T), T.graph(), hashable=True)
    if kind == "star-forest":
        comps = [con.StarPattern(_legs(text)) for text in (args.legs or [])]
        offsets = np.cumsum([0] + [p.n_vertices for p in comps]).tolist()
        labels = tuple(range(offsets[-1]))
        size = offsets[-1]

        def pieces(g, c):
            out = []
            for i, p in enumerate(comps):
                lo, hi = offsets[i], offsets[i + 1]
                verts = [v for v in range(g.n) if lo <= c[v] < hi]
                if not verts:
                    return None
                sub, _ = g.induced(verts)
                local = Coloring(p.labels, tuple(c[v] - lo for v in verts))
                out.extend(_star_pieces(p)(sub, local))
            return out
        p_succ = float(size) ** (-size) if size else 1.0
        return Problem(labels, p_succ, pieces, _disjoint_union(p.graph() for p in comps), hashable=True)
    if kind == "triangle":
        def pieces(g, c):
            ti = con.triangle_program(c, g)
            return [Piece(ti.program, ti.assignment, 4.0, 8.0 * g.n ** 4)]
        return Problem((0, 1, 2), con.TRIANGLE_SUCCESS_PROBABILITY, pieces, triangle())
    if kind == "two-leg-star":
        if None in (args.k, args.hub, args.d):
            raise UsageError("two-leg-star needs --k, --hub and --d")
        T = con.TwoLegStar(args.k, args.hub, args.d)

        def pieces(g, c):
            inst = con.two_leg_star_instance(T, c, g)
            canon = inst.program.n_inputs + inst.program.n_free
            return [Piece(inst.program, inst.assignment, float(T.k + 2 * T.d + 1), 4.0 * canon)]
        return Problem(T.labels, T.success_probability(), pieces, T.graph())
    raise UsageError(f"unknown problem {kind!r}")


def _read(path_: str) -> bytes:
    try:
        with open(path_, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path_}: {exc.strerror}") from None


def _coloring_from_file(data: bytes, labels: tuple, n: int) -> Coloring:
    tokens = parse_coloring(data, n)
    try:
        values = [int(tok) for tok in tokens]
    except ValueError:
        raise UsageError("coloring labels must be integers (pattern vertex indices)") from None
    return Coloring(labels, tuple(values))


def _trial_colorings(args, problem: Problem, g: SimpleGraph):
    """Yields ``(seed, graph, coloring)``; the graph shrinks when a hash leaves vertices uncolored."""
    if problem.labels is None:
        yield None, g, None
        return
    if args.coloring:
        yield None, g, _coloring_from_file(_read(args.coloring), problem.labels, g.n)
        return
    trials = args.trials if args.trials is not None else ceil(3 / problem.success_probability)
    for i in range(trials):
        seed = (args.seed + i) % U64
        if args.hash_family:
            k, m = args.hash_family
            size = 1 << m
            if size < g.n:
                raise UsageError(f"hash field 2^{m} is smaller than the vertex count {g.n}")
            ell = 1
            while ell < len(problem.labels):
                ell *= 2
            h = KWiseHash.from_seed(size, ell, k, seed)
            col, keep = hash_coloring(g, problem.labels, h)
            if col is None:
                yield seed, None, None
                continue
            sub, _ = g.induced(keep)
            yield seed, sub, col
        else:
            yield seed, g, random_coloring(g, problem.labels, seed)


def _oracle_facts(args, problem: Problem, g: SimpleGraph, fixed: Coloring | None) -> dict:
    if args.problem == "stconn":
        return {"connected": is_connected(g, args.s, args.t)}
    facts = {"contains_subgraph": contains_subgraph(g, problem.pattern)}
    if args.problem in ("star", "star-forest"):
        facts["contains_minor"] = contains_minor(g, problem.pattern)
    if args.problem == "triangle":
        facts["is_forest"] = con.is_forest(g)
    if fixed is not None:
        facts["correctly_colored"] = has_correctly_colored_subgraph(g, fixed, problem.pattern)
    return facts


def _consistent(problem: str, decision: int, facts: dict) -> bool:
    if problem == "stconn":
        return decision == int(facts["connected"])
    if decision and problem in ("star", "star-forest"):
        return facts["contains_minor"]
    if decision and problem == "triangle":
        return not facts["is_forest"]
    if decision:
        return facts["contains_subgraph"]
    return True


def run_detection(args, simulate: bool) -> dict:
    data = _read(args.graph)
    try:
        g = parse_edge_list(data)
    except (GraphError, UnicodeDecodeError) as exc:
        raise UsageError(f"{args.graph}: {exc}") from None
    problem = build_problem(args, g.n)
    if args.hash_family and not problem.hashable:
        raise UsageError("--hash-family applies to star detection only")
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate" if simulate else "detect",
        "problem": args.problem,
        "input_sha256": hashlib.sha256(data).hexdigest(),
        "params": _params(args),
    }
    if args.coloring:
        report["coloring_sha256"] = hashlib.sha256(_read(args.coloring)).hexdigest()
    started = time.perf_counter()
    trials, decision, fixed = [], 0, None
    for seed, tg, col in _trial_colorings(args, problem, g):
        if args.coloring:
            fixed = col
        record = {"trial": len(trials), "seed": seed}
        pieces = problem.pieces(tg, col) if tg is not None else None
        if pieces is None:
            record["accept"] = 0
            record["note"] = "some color class is empty"
            trials.append(record)
            continue
        outcome = 1
        for piece in pieces:
            if simulate:
                prog, x = piece.canonical()
                try:
                    cfg = EvaluatorConfig(piece.W1, piece.W0, C1=args.c1, C2=args.c2)
                except ConfigError as exc:
                    raise UsageError(str(exc)) from None
                res = run_evaluator(prog, x, cfg)
                record.setdefault("masses", []).append(res.mass)
                record.setdefault("theta", []).append(res.theta)
                outcome &= res.bit
            else:
                bit = evaluate(piece.program, piece.x, args.tolerance)
                if args.witness:
                    wit = (positive_witness(piece.program, piece.x) if bit
                           else negative_witness(piece.program, piece.x))
                    record.setdefault("witness_sizes", []).append(wit.size)
                outcome &= bit
        record["accept"] = outcome
        trials.append(record)
        if outcome:
            decision = 1
            break
    report["decision"] = decision
    report["trials_run"] = len(trials)
    report["trials"] = trials
    if args.verify:
        facts = _oracle_facts(args, problem, g, fixed)
        report["oracle"] = facts
        report["consistent"] = _consistent(args.problem, decision, facts)
    if args.timings:
        report["timings"] = {"total_seconds": time.perf_counter() - started}
    return report


def _params(args) -> dict:
    keys = ("s", "t", "d", "k", "hub", "legs", "seed", "trials", "tolerance", "c1", "c2", "hash_family")
    out = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = list(val) if isinstance(val, (list, tuple)) else val
    return out


def run_verify(args) -> tuple[dict, int]:
    names = SUITES if args.suite == "all" else (args.suite,)
    started = time.perf_counter()
    results = [run_suite(name, args.seed) for name in names]
    report = {"schema_version": SCHEMA_VERSION, "command": "verify",
              "suites": [r.as_dict() for r in results], "ok": all(r.ok for r in results)}
    if args.timings:
        report["timings"] = {"total_seconds": time.perf_counter() - started}
    return report, 0 if report["ok"] else 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < U64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return val


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spanprog", description="Span-program subgraph detection and walk simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--json", metavar="PATH", help="also write the report to PATH")
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--timings", action="store_true", help="include wall-clock timings (not byte-stable)")

    for name, helptext in (("detect", "evaluate the span program on the input graph"),
                           ("simulate", "run the reflection-walk evaluator")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("problem", choices=PROBLEMS)
        p.add_argument("graph", help="edge-list file")
        p.add_argument("--s", type=int)
        p.add_argument("--t", type=int)
        p.add_argument("--d", type=int, help="stconn: distance bound; two-leg-star: extra leaves")
        p.add_argument("--k", type=int, help="path length, or two-leg-star path vertex count")
        p.add_argument("--hub", type=int, help="two-leg-star hub index (2..k-1)")
        p.add_argument("--legs", action="append", help="comma-separated leg lengths (repeat for star-forest)")
        p.add_argument("--trials", type=_positive_int)
        p.add_argument("--tolerance", type=float, default=MEMBERSHIP_TOL)
        p.add_argument("--c1", type=float, default=1.0)
        p.add_argument("--c2", type=float, default=10.0)
        p.add_argument("--coloring", metavar="FILE")
        p.add_argument("--verify", action="store_true", help="cross-check with brute-force oracles")
        p.add_argument("--witness", action="store_true", help="report optimal witness sizes")
        p.add_argument("--hash-family", nargs=2, type=int, metavar=("K", "M"),
                       help="color with a K-wise independent hash over GF(2^M)")
        common(p)
    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    common(p)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            report, status = run_verify(args)
        else:
            report, status = run_detection(args, simulate=args.command == "simulate"), 0
    except (UsageError, GraphError, ConfigError) as exc:
        print(f"spanprog: error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
