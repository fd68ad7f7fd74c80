import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import all_labelled_graphs
from spanprog.constructors import stconn_program
from spanprog.graphs import path
from spanprog.span import SpanProgram, SpanProgramError, canonicalize_free, evaluate, witness_size
from spanprog.walk import (ConfigError, EvaluatorConfig, ReflectionSystem, build_U, effective_gap_check,
                           nullspace_projector, phase_decomposition, phase_mass, random_reflection_system,
                           run_evaluator, spectral_decompose_product)


def random_program(rng, dim, n_inputs, nvars):
    return SpanProgram(rng.standard_normal(dim), np.zeros((dim, 0)), rng.standard_normal((dim, n_inputs)),
                       rng.integers(0, nvars, n_inputs), rng.integers(0, 2, n_inputs), nvars)


def rotation_system(theta):
    return ReflectionSystem(np.array([[1.0], [0.0]]), np.array([[np.cos(theta)], [np.sin(theta)]]))


# configuration

def test_config_derived_quantities():
    cfg = EvaluatorConfig(W1_bound=4, W0_bound=9, C1=2, C2=5)
    assert cfg.W == pytest.approx(6)
    assert cfg.alpha == pytest.approx(4)
    assert cfg.theta == pytest.approx(1 / 30)
    assert cfg.mass_bounds() == pytest.approx((0.8, 0.16))


@pytest.mark.parametrize("kw", [dict(W1_bound=0, W0_bound=1), dict(W1_bound=1, W0_bound=1, C2=-1),
                                dict(W1_bound=0.1, W0_bound=0.1)])
def test_config_rejects_invalid(kw):
    with pytest.raises(ConfigError):
        EvaluatorConfig(**kw)


# the walk operator

def test_nullspace_projector():
    V = np.array([[1.0, 1.0, 0.0]])
    P = nullspace_projector(V)
    assert np.allclose(P @ P, P) and np.allclose(V @ P, 0)
    assert np.trace(P) == pytest.approx(2)


def test_trivial_nullspace_gives_minus_availability_reflection():
    p = SpanProgram.build([1.0, 0.0], inputs=[([0, 1], 0, 1)])
    cfg = EvaluatorConfig(1, 1)
    for x in ([0], [1]):
        op = build_U(p, x, cfg)
        R_pi = np.diag(2 * op.available - 1)
        assert np.allclose(op.U, -R_pi)
        phases = phase_decomposition(op.U).eigenphases
        assert np.all(np.isclose(np.abs(phases), 0) | np.isclose(np.abs(phases), np.pi))


def test_everything_available_gives_nullspace_reflection():
    rng = np.random.default_rng(0)
    p = random_program(rng, 3, 6, 1)
    p = SpanProgram(p.target, p.free, p.inputs, np.zeros(6, dtype=int), np.ones(6, dtype=int), 1)
    cfg = EvaluatorConfig(2, 2)
    op = build_U(p, [1], cfg)
    V = np.hstack([p.target[:, None] / cfg.alpha, p.inputs])
    assert np.allclose(op.U, 2 * nullspace_projector(V) - np.eye(7))


def test_build_U_rejects_free_vectors():
    p = SpanProgram.build([1.0], free=[[1.0]], inputs=[([1.0], 0, 1)])
    with pytest.raises(SpanProgramError):
        build_U(p, [1], EvaluatorConfig(1, 1))
    assert build_U(canonicalize_free(p), [1, 1], EvaluatorConfig(1, 1)).U.shape == (3, 3)


def test_U_is_orthogonal_on_random_programs():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = random_program(rng, int(rng.integers(1, 6)), int(rng.integers(1, 9)), 3)
        x = rng.integers(0, 2, 3)
        U = build_U(p, x, EvaluatorConfig(1.5, 4.0)).U
        assert np.abs(U.T @ U - np.eye(U.shape[0])).max() < 1e-10


def test_schur_decomposition_reconstructs_and_matches_window_mass():
    rng = np.random.default_rng(2)
    for _ in range(40):
        p = random_program(rng, int(rng.integers(2, 6)), int(rng.integers(2, 9)), 3)
        U = build_U(p, rng.integers(0, 2, 3), EvaluatorConfig(1.0, 2.0)).U
        dec = phase_decomposition(U)
        assert np.abs(dec.reconstruct() - U).max() < 1e-8
        assert np.all(dec.eigenphases > -np.pi) and np.all(dec.eigenphases <= np.pi)
        # nontrivial phases come in +- pairs
        nontrivial = np.sort(dec.eigenphases[np.abs(np.sin(dec.eigenphases)) > 1e-6])
        assert np.allclose(nontrivial, -nontrivial[::-1], atol=1e-8)
        e0 = np.eye(U.shape[0])[0]
        for theta in (0.05, 0.5, 2.0):
            schur_mass = float(np.linalg.norm(dec.projector(theta) @ e0) ** 2)
            assert phase_mass(U, theta, e0) == pytest.approx(schur_mass, abs=1e-8)


# the evaluator

def test_degenerate_single_vector_program_accepts():
    p = SpanProgram.build([1.0], inputs=[([1.0], 0, 1)])
    res = run_evaluator(p, [1], EvaluatorConfig(1, 1))
    assert res.bit == 1 and res.mass == pytest.approx(0.5)
    assert res.dimension == 2


def test_stconn_path_instance_mass():
    inst = stconn_program(4, 0, 3)
    cfg = EvaluatorConfig(W1_bound=3, W0_bound=4 * 6)
    res = run_evaluator(inst.program, inst.assignment(path(3)), cfg, with_phases=True)
    assert res.bit == 1
    # the witness has size exactly W1, so the lower bound 1/2 is attained up to rounding
    assert res.mass == pytest.approx(0.5, abs=1e-9)
    assert res.as_dict()["eigenphases"] == list(res.eigenphases)


def test_stconn_exhaustive_separation_four_vertices():
    inst = stconn_program(4, 0, 3)
    cfg = EvaluatorConfig(W1_bound=3, W0_bound=4 * 6)
    lo, hi = cfg.mass_bounds()
    for g in all_labelled_graphs(4):
        x = inst.assignment(g)
        res = run_evaluator(inst.program, x, cfg)
        assert res.bit == evaluate(inst.program, x)
        if res.bit:
            assert res.mass >= lo - 1e-9
        else:
            assert res.mass <= hi + 1e-9


def test_mass_bounds_hold_with_exact_witness_sizes():
    """With W1/W0 set to the true worst cases over the domain, the guaranteed bounds hold."""
    rng = np.random.default_rng(3)
    for _ in range(40):
        p = random_program(rng, 3, 6, 2)
        domain = [np.array(x) for x in itertools.product((0, 1), repeat=2)]
        ws = witness_size(p, domain)
        if ws.W0 is None or ws.W1 is None or ws.W1 == 0 or ws.W0 == 0:
            continue
        for C1, C2 in ((1.0, 10.0), (2.0, 30.0)):
            if C1 * np.sqrt(ws.W0 * ws.W1) < 1:
                continue
            cfg = EvaluatorConfig(ws.W1, ws.W0, C1, C2)
            lo, hi = cfg.mass_bounds()
            for x in domain:
                res = run_evaluator(p, x, cfg)
                if evaluate(p, x):
                    assert res.mass >= lo - 1e-9
                else:
                    assert res.mass <= hi + 1e-9


# two-reflection systems

def test_reflection_system_validation():
    with pytest.raises(ConfigError):
        ReflectionSystem(np.array([[2.0], [0.0]]), np.array([[1.0], [0.0]]))
    with pytest.raises(ConfigError):
        ReflectionSystem(np.eye(2)[:, :1], np.eye(3)[:, :1])
    sparse = ReflectionSystem(sp.csr_matrix(np.eye(3)[:, :2]), sp.csr_matrix(np.eye(3)[:, 1:]))
    assert sparse.D.tolist() == [[0.0, 0.0], [1.0, 0.0]]


@pytest.mark.parametrize("theta", [0.1, 0.3, 1.2])
def test_two_dimensional_rotation(theta):
    dec, chk = spectral_decompose_product(rotation_system(theta))
    assert chk.ok
    assert np.allclose(dec.eigenphases, [-2 * theta, 2 * theta])


def test_orthogonal_subspaces_give_trivial_phases():
    rs = ReflectionSystem(np.eye(4)[:, :2], np.eye(4)[:, 2:])
    dec, chk = spectral_decompose_product(rs)
    assert chk.ok and np.allclose(rs.D, 0)
    assert np.allclose(np.abs(np.sin(dec.eigenphases)), 0)
    assert chk.minus_dim == 4


def test_spectral_lemma_on_random_systems():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dim = int(rng.integers(2, 21))
        shared = int(rng.integers(0, dim // 3 + 1))
        perp = int(rng.integers(0, (dim - shared) // 3 + 1))
        room = dim - shared - perp
        rs = random_reflection_system(dim, shared + int(rng.integers(0, room + 1)),
                                      shared + int(rng.integers(0, room + 1)), rng, shared, perp)
        _, chk = spectral_decompose_product(rs)
        assert chk.ok, chk.as_dict()
        assert chk.plus_dim >= shared + perp


def test_random_reflection_system_ranks():
    rng = np.random.default_rng(5)
    rs = random_reflection_system(10, 4, 5, rng, shared=2, shared_perp=1)
    assert rs.A.shape == (10, 4) and rs.B.shape == (10, 5)
    with pytest.raises(ConfigError):
        random_reflection_system(4, 1, 1, rng, shared=2)


def test_gap_zero_window_without_zero_phase():
    chk = effective_gap_check(rotation_system(0.4), 0.0)
    assert chk.max_ratio == 0 and chk.exact_norm == 0 and chk.ok


@pytest.mark.parametrize("theta, window", [(0.4, 0.5), (0.2, 0.5), (0.1, 1.0)])
def test_gap_two_dimensional_closed_form(theta, window):
    chk = effective_gap_check(rotation_system(theta), window, trials=4)
    # u = e2 is the only direction; P_window Pi_B e2 is sin(theta) b when 2 theta <= window, else 0
    expected = abs(np.sin(theta)) if 2 * theta <= window else 0.0
    assert chk.exact_norm == pytest.approx(expected, abs=1e-12)
    assert chk.max_ratio == pytest.approx(expected, abs=1e-12)
    assert chk.ok


def test_gap_bound_on_random_systems():
    rng = np.random.default_rng(6)
    for i in range(60):
        rs = random_reflection_system(16, int(rng.integers(1, 16)), int(rng.integers(1, 16)), rng)
        for window in (0.1, 0.5):
            chk = effective_gap_check(rs, window, trials=8, seed=i)
            assert chk.ok
            assert chk.max_ratio <= chk.exact_norm + 1e-12


def test_gap_rejects_bad_window():
    with pytest.raises(ConfigError):
        effective_gap_check(rotation_system(0.3), -0.1)
