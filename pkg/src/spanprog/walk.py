"""Exact simulation of the reflection-product evaluator and checks of its spectral facts.

Phase estimation is replaced by an exact eigendecomposition: the accept
statistic is the squared norm of the projection of the target basis state
onto eigenvectors whose eigenphase is at most ``theta`` in magnitude.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .span import SpanProgram, SpanProgramError

NULLSPACE_RCOND = 1e-10
ORTHO_TOL = 1e-10
PHASE_TOL = 1e-8
ACCEPT_THRESHOLD = 0.25


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluatorConfig:
    W1_bound: float
    W0_bound: float
    C1: float = 1.0
    C2: float = 10.0
    accept_threshold: float = ACCEPT_THRESHOLD

    def __post_init__(self):
        for name in ("W1_bound", "W0_bound", "C1", "C2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.C1 * self.W < 1:
            raise ConfigError("need C1 * W >= 1")

    @property
    def W(self) -> float:
        return float(np.sqrt(self.W0_bound * self.W1_bound))

    @property
    def alpha(self) -> float:
        return float(self.C1 * np.sqrt(self.W1_bound))

    @property
    def theta(self) -> float:
        return float(1.0 / (self.C2 * self.W))

    def mass_bounds(self) -> tuple[float, float]:
        """Guaranteed (1-input lower bound, 0-input upper bound) on the accept statistic."""
        c1sq = self.C1 ** 2
        return c1sq / (c1sq + 1), (self.C1 / self.C2) ** 2


def nullspace_projector(V: np.ndarray, rcond: float = NULLSPACE_RCOND) -> np.ndarray:
    m = V.shape[1]
    if V.shape[0] == 0 or m == 0:
        return np.eye(m)
    _, s, vh = np.linalg.svd(V, full_matrices=True)
    cutoff = rcond * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    N = vh[rank:].T
    return N @ N.T


@dataclass(frozen=True)
class WalkOperator:
    U: np.ndarray
    index: tuple       # index 0 -> 'target', index j + 1 -> ('input', j)
    available: np.ndarray  # diagonal of the availability projector


def build_U(p: SpanProgram, x, cfg: EvaluatorConfig) -> WalkOperator:
    """``U = (2 Lambda - I)(2 Pi_x - I)`` on the span of ``target/alpha`` and the input vectors."""
    if p.n_free:
        raise SpanProgramError("free vectors present; canonicalize the program first")
    mask = p.available_mask(x)
    V = np.hstack([p.target[:, None] / cfg.alpha, p.inputs])
    m = V.shape[1]
    lam = nullspace_projector(V)
    pi = np.concatenate([[1.0], mask.astype(float)])
    U = (2 * lam - np.eye(m)) * (2 * pi - 1)[None, :]
    index = ("target",) + tuple(("input", j) for j in range(p.n_inputs))
    return WalkOperator(U, index, pi)


@dataclass(frozen=True)
class PhaseDecomposition:
    eigenphases: np.ndarray   # sorted, in (-pi, pi]
    eigenvectors: np.ndarray  # complex, orthonormal columns

    def reconstruct(self) -> np.ndarray:
        Z = self.eigenvectors
        return (Z * np.exp(1j * self.eigenphases)[None, :]) @ Z.conj().T

    def projector(self, theta: float) -> np.ndarray:
        Z = self.eigenvectors[:, np.abs(self.eigenphases) <= theta]
        return Z @ Z.conj().T


def phase_decomposition(U: np.ndarray) -> PhaseDecomposition:
    """Eigenphases of a real orthogonal matrix via the complex Schur form (diagonal for normal matrices)."""
    T, Z = scipy.linalg.schur(U.astype(complex), output="complex")
    phases = np.angle(np.diag(T))
    phases[phases <= -np.pi + 1e-15] = np.pi
    order = np.argsort(phases, kind="stable")
    return PhaseDecomposition(phases[order], Z[:, order])


def phase_window_basis(U: np.ndarray, theta: float) -> np.ndarray:
    """Real orthonormal basis of the eigenspaces with ``|phase| <= theta``.

    For a normal ``U`` the symmetric part ``(U + U^T)/2`` has eigenvalue
    ``cos(phase)`` on each such eigenspace, so the window is a threshold on
    ``cos``.
    """
    sym = (U + U.T) / 2
    evals, evecs = np.linalg.eigh(sym)
    return evecs[:, evals >= np.cos(theta) - 1e-12]


def phase_mass(U: np.ndarray, theta: float, vec: np.ndarray) -> float:
    Q = phase_window_basis(U, theta)
    return float(np.sum((Q.T @ vec) ** 2))


@dataclass(frozen=True)
class EvaluatorResult:
    bit: int
    mass: float
    theta: float
    alpha: float
    threshold: float
    dimension: int
    eigenphases: tuple | None = field(default=None)

    def as_dict(self) -> dict:
        d = {"bit": self.bit, "mass": self.mass, "theta": self.theta, "alpha": self.alpha,
             "threshold": self.threshold, "dimension": self.dimension}
        if self.eigenphases is not None:
            d["eigenphases"] = list(self.eigenphases)
        return d


def run_evaluator(p: SpanProgram, x, cfg: EvaluatorConfig, with_phases: bool = False) -> EvaluatorResult:
    op = build_U(p, x, cfg)
    e0 = np.zeros(op.U.shape[0])
    e0[0] = 1.0
    mass = phase_mass(op.U, cfg.theta, e0)
    phases = tuple(float(v) for v in phase_decomposition(op.U).eigenphases) if with_phases else None
    return EvaluatorResult(int(mass >= cfg.accept_threshold), mass, cfg.theta, cfg.alpha,
                           cfg.accept_threshold, op.U.shape[0], phases)


# --------------------------------------------------------------------------
# Two-reflection systems


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


@dataclass(frozen=True, eq=False)
class ReflectionSystem:
    """Orthonormal column systems ``A`` and ``B`` in one ambient space (dense or sparse)."""

    A: object
    B: object

    def __post_init__(self):
        if self.A.shape[0] != self.B.shape[0]:
            raise ConfigError("A and B live in different ambient spaces")
        for name in ("A", "B"):
            M = getattr(self, name)
            gram = _dense(M.T @ M)
            if np.abs(gram - np.eye(gram.shape[0])).max(initial=0.0) > ORTHO_TOL:
                raise ConfigError(f"{name} does not have orthonormal columns")

    @classmethod
    def from_spans(cls, X: np.ndarray, Y: np.ndarray) -> "ReflectionSystem":
        return cls(scipy.linalg.orth(X), scipy.linalg.orth(Y))

    @property
    def ambient(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> np.ndarray:
        return _dense(self.A.T @ self.B)

    def reflection(self, which: str) -> np.ndarray:
        M = _dense(getattr(self, which))
        return 2 * M @ M.T - np.eye(self.ambient)

    def product(self) -> np.ndarray:
        """``U = R_B R_A``."""
        return self.reflection("B") @ self.reflection("A")


def random_reflection_system(dim: int, rank_a: int, rank_b: int, rng, shared: int = 0,
                             shared_perp: int = 0) -> ReflectionSystem:
    """Random subspaces; ``shared`` directions lie in both, ``shared_perp`` in neither."""
    Q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
    common = Q[:, :shared]
    rest = Q[:, shared:dim - shared_perp]
    ka, kb = rank_a - shared, rank_b - shared
    if ka < 0 or kb < 0 or ka > rest.shape[1] or kb > rest.shape[1]:
        raise ConfigError("inconsistent ranks")
    X = np.hstack([common, rest @ rng.standard_normal((rest.shape[1], ka))])
    Y = np.hstack([common, rest @ rng.standard_normal((rest.shape[1], kb))])
    return ReflectionSystem.from_spans(X, Y)


def _intersection_dim(X: np.ndarray, Y: np.ndarray) -> int:
    if X.shape[1] == 0 or Y.shape[1] == 0:
        return 0
    return scipy.linalg.null_space(np.hstack([X, -Y]), rcond=1e-9).shape[1]


def _complement(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return np.eye(M.shape[0])
    return scipy.linalg.null_space(M.T, rcond=1e-9)


@dataclass(frozen=True)
class SpectralCheck:
    plus_dim: int
    plus_expected: int
    minus_dim: int
    minus_expected: int
    max_singular_value: float
    phase_error: float  # max deviation of nontrivial phases from +-2 arccos(sigma); inf on count mismatch
    reconstruction_error: float

    @property
    def ok(self) -> bool:
        return (self.plus_dim == self.plus_expected and self.minus_dim == self.minus_expected
                and self.max_singular_value <= 1 + 1e-10 and self.phase_error <= PHASE_TOL
                and self.reconstruction_error <= 1e-8)

    def as_dict(self) -> dict:
        return {"plus_dim": self.plus_dim, "plus_expected": self.plus_expected,
                "minus_dim": self.minus_dim, "minus_expected": self.minus_expected,
                "max_singular_value": self.max_singular_value, "phase_error": self.phase_error,
                "reconstruction_error": self.reconstruction_error, "ok": self.ok}


def spectral_decompose_product(rs: ReflectionSystem, tol: float = 1e-11) -> tuple[PhaseDecomposition, SpectralCheck]:
    """Decompose ``R_B R_A`` and compare with what the singular values of ``A^T B`` predict.

    A phase counts as trivial (0 or pi) when ``|cos(phase)| >= 1 - tol``; the
    same test is applied to ``cos(2 arccos sigma) = 2 sigma^2 - 1``.
    """
    A, B = _dense(rs.A), _dense(rs.B)
    U = rs.product()
    dec = phase_decomposition(U)
    ph = dec.eigenphases
    cos_ph = np.cos(ph)
    plus = int(np.sum(cos_ph >= 1 - tol))
    minus = int(np.sum(cos_ph <= -1 + tol))
    Ac, Bc = _complement(A), _complement(B)
    plus_exp = _intersection_dim(A, B) + _intersection_dim(Ac, Bc)
    minus_exp = _intersection_dim(A, Bc) + _intersection_dim(Ac, B)

    sigma_all = np.linalg.svd(rs.D, compute_uv=False) if min(rs.D.shape) else np.zeros(0)
    sigma = sigma_all[np.abs(2 * sigma_all ** 2 - 1) < 1 - tol]
    angles = 2 * np.arccos(np.clip(sigma, 0.0, 1.0))
    predicted = np.sort(np.concatenate([angles, -angles]))
    actual = np.sort(ph[np.abs(cos_ph) < 1 - tol])
    if predicted.shape != actual.shape:
        err = float("inf")
    else:
        err = float(np.abs(predicted - actual).max(initial=0.0))
    recon = float(np.abs(dec.reconstruct() - U).max(initial=0.0))
    check = SpectralCheck(plus, plus_exp, minus, minus_exp, float(sigma_all.max(initial=0.0)), err, recon)
    return dec, check


@dataclass(frozen=True)
class GapCheck:
    theta: float
    max_ratio: float   # over sampled u in the complement of C(A)
    exact_norm: float  # operator norm of P_theta Pi_B restricted to that complement
    trials: int

    @property
    def bound(self) -> float:
        return self.theta / 2

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.bound + 1e-9 and self.exact_norm <= self.bound + 1e-9


def effective_gap_check(rs: ReflectionSystem, theta: float, trials: int = 32, seed: int = 0) -> GapCheck:
    """Largest ``||P_theta Pi_B u|| / ||u||`` over random ``u`` orthogonal to ``C(A)``."""
    if not 0 <= theta <= np.pi:
        raise ConfigError("theta must lie in [0, pi]")
    A, B = _dense(rs.A), _dense(rs.B)
    Q = phase_window_basis(rs.product(), theta)
    Aperp = _complement(A)
    M = Q.T @ (B @ (B.T @ Aperp))  # coordinates of P_theta Pi_B on the complement basis
    exact = float(np.linalg.norm(M, 2)) if M.size else 0.0
    rng = np.random.default_rng(seed)
    best = 0.0
    if Aperp.shape[1]:
        for _ in range(trials):
            c = rng.standard_normal(Aperp.shape[1])
            best = max(best, float(np.linalg.norm(M @ c) / np.linalg.norm(c)))
    return GapCheck(float(theta), best, exact, trials)
