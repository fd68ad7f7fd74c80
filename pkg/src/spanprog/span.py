"""Real span programs: evaluation, optimal witnesses and witness sizes."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

MEMBERSHIP_TOL = 1e-8
PINV_RCOND = 1e-12


class SpanProgramError(ValueError):
    pass


class NotFeasibleError(SpanProgramError):
    """Asked for a witness of the wrong kind (positive on a 0-input or vice versa)."""


@dataclass(frozen=True, eq=False)
class SpanProgram:
    """Target vector, free vectors and labelled input vectors in ``R^dim``.

    ``free`` is a ``dim x n_free`` matrix and ``inputs`` a ``dim x n_inputs``
    matrix; input column ``j`` is available on ``x`` iff ``x[input_vars[j]] ==
    input_bits[j]``.
    """

    target: np.ndarray
    free: np.ndarray
    inputs: np.ndarray
    input_vars: np.ndarray
    input_bits: np.ndarray
    nvars: int
    labels: tuple | None = field(default=None)  # optional names of basis vectors

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float).reshape(-1)
        dim = target.shape[0]
        free = np.asarray(self.free, dtype=float).reshape(dim, -1)
        inputs = np.asarray(self.inputs, dtype=float).reshape(dim, -1)
        ivars = np.asarray(self.input_vars, dtype=int).reshape(-1)
        ibits = np.asarray(self.input_bits, dtype=int).reshape(-1)
        if ivars.shape[0] != inputs.shape[1] or ibits.shape[0] != inputs.shape[1]:
            raise SpanProgramError("one (var, bit) label per input column")
        if ivars.size and (ivars.min() < 0 or ivars.max() >= self.nvars):
            raise SpanProgramError("input variable index out of range")
        if ibits.size and not np.isin(ibits, (0, 1)).all():
            raise SpanProgramError("input bits must be 0 or 1")
        if self.labels is not None and len(self.labels) != dim:
            raise SpanProgramError("one label per basis vector")
        for name, arr in (("target", target), ("free", free), ("inputs", inputs),
                          ("input_vars", ivars), ("input_bits", ibits)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def build(cls, target, free: Sequence = (), inputs: Iterable = (), nvars: int | None = None,
              labels=None) -> "SpanProgram":
        """Convenience constructor from lists: ``inputs`` yields ``(vector, var, bit)``."""
        target = np.asarray(target, dtype=float)
        dim = target.shape[0]
        free_m = np.array(list(free), dtype=float).reshape(-1, dim).T
        vecs, ivars, ibits = [], [], []
        for vec, var, bit in inputs:
            vecs.append(vec)
            ivars.append(var)
            ibits.append(bit)
        inp = np.array(vecs, dtype=float).reshape(-1, dim).T
        if nvars is None:
            nvars = max(ivars) + 1 if ivars else 0
        return cls(target, free_m, inp, np.array(ivars, dtype=int), np.array(ibits, dtype=int),
                   nvars, None if labels is None else tuple(labels))

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    @property
    def n_free(self) -> int:
        return self.free.shape[1]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    def available_mask(self, x) -> np.ndarray:
        x = _as_assignment(self, x)
        return x[self.input_vars] == self.input_bits

    # JSON wire format -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "nvars": self.nvars,
            "target": self.target.tolist(),
            "free": self.free.T.tolist(),
            "inputs": [{"vec": self.inputs[:, j].tolist(), "var": int(self.input_vars[j]),
                        "bit": int(self.input_bits[j])} for j in range(self.n_inputs)],
        }
        if self.labels is not None:
            doc["labels"] = [str(lab) for lab in self.labels]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SpanProgram":
        doc = json.loads(text)
        dim = int(doc["dim"])
        if len(doc["target"]) != dim:
            raise SpanProgramError("target length does not match dim")
        for vec in doc["free"]:
            if len(vec) != dim:
                raise SpanProgramError("free vector length does not match dim")
        inputs = [(d["vec"], d["var"], d["bit"]) for d in doc["inputs"]]
        for vec, _, _ in inputs:
            if len(vec) != dim:
                raise SpanProgramError("input vector length does not match dim")
        return cls.build(doc["target"], doc["free"], inputs, nvars=int(doc["nvars"]),
                         labels=doc.get("labels"))

    def __eq__(self, other):
        if not isinstance(other, SpanProgram):
            return NotImplemented
        return (self.nvars == other.nvars
                and self.target.shape == other.target.shape
                and np.array_equal(self.target, other.target)
                and np.array_equal(self.free, other.free)
                and np.array_equal(self.inputs, other.inputs)
                and np.array_equal(self.input_vars, other.input_vars)
                and np.array_equal(self.input_bits, other.input_bits))

    __hash__ = None


def _as_assignment(p: SpanProgram, x) -> np.ndarray:
    x = np.asarray(x, dtype=int).reshape(-1)
    if x.shape[0] != p.nvars:
        raise SpanProgramError(f"assignment has {x.shape[0]} bits, program has {p.nvars} variables")
    return x


@dataclass(frozen=True)
class Available:
    """Columns of ``V_free`` followed by the available input vectors, in program order."""

    matrix: np.ndarray
    n_free: int
    input_index: np.ndarray  # program index of each input column after the free block

    def origin(self, col: int) -> tuple[str, int]:
        if col < self.n_free:
            return ("free", col)
        return ("input", int(self.input_index[col - self.n_free]))


def available_matrix(p: SpanProgram, x) -> Available:
    mask = p.available_mask(x)
    idx = np.flatnonzero(mask)
    return Available(np.hstack([p.free, p.inputs[:, idx]]), p.n_free, idx)


def _in_span(M: np.ndarray, tau: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
    tnorm = np.linalg.norm(tau)
    if tnorm == 0:
        return True
    if M.shape[1] == 0:
        return False
    coef = np.linalg.lstsq(M, tau, rcond=None)[0]
    return np.linalg.norm(tau - M @ coef) / tnorm < tol


def evaluate(p: SpanProgram, x, tol: float = MEMBERSHIP_TOL) -> int:
    """1 iff the least-squares residual of the target is below ``tol`` relative to its norm."""
    return int(_in_span(available_matrix(p, x).matrix, p.target, tol))


@dataclass(frozen=True)
class PositiveWitness:
    w: np.ndarray        # one coefficient per program input (zero on unavailable inputs)
    w_free: np.ndarray
    size: float


@dataclass(frozen=True)
class NegativeWitness:
    wprime: np.ndarray
    size: float


def complement_projector(M: np.ndarray, dim: int) -> np.ndarray:
    """Orthogonal projector onto the complement of the column space of ``M``."""
    if M.shape[1] == 0:
        return np.eye(dim)
    Q = scipy.linalg.orth(M, rcond=PINV_RCOND)
    return np.eye(dim) - Q @ Q.T


def _min_norm_solve(M: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    """Minimum-norm least-squares solution, cutting singular values against an absolute scale.

    A relative cutoff would promote rounding noise to signal when the projected
    matrix is numerically zero (free vectors spanning everything).
    """
    if M.size == 0:
        return np.zeros(M.shape[1])
    U, sv, Vt = np.linalg.svd(M, full_matrices=False)
    keep = sv > PINV_RCOND * scale
    return Vt[keep].T @ ((U[:, keep].T @ b) / sv[keep])


def positive_witness(p: SpanProgram, x) -> PositiveWitness:
    """Minimum ``||w||^2`` witness; free coefficients are not charged."""
    if not evaluate(p, x):
        raise NotFeasibleError("target not in the span of available vectors")
    mask = p.available_mask(x)
    Vx = p.inputs[:, mask]
    Q = complement_projector(p.free, p.dim)
    w_av = _min_norm_solve(Q @ Vx, Q @ p.target, scale=max(1.0, np.linalg.norm(Vx, 2) if Vx.size else 0.0))
    resid = p.target - Vx @ w_av
    if p.n_free:
        w_free = np.linalg.lstsq(p.free, resid, rcond=None)[0]
    else:
        w_free = np.zeros(0)
    w = np.zeros(p.n_inputs)
    w[mask] = w_av
    return PositiveWitness(w, w_free, float(w_av @ w_av))


def negative_witness(p: SpanProgram, x) -> NegativeWitness:
    """Minimum ``||V^T w'||^2`` over ``w'`` orthogonal to available vectors with ``<w', target> = 1``."""
    if evaluate(p, x):
        raise NotFeasibleError("target lies in the span of available vectors")
    A = available_matrix(p, x).matrix
    N = scipy.linalg.null_space(A.T, rcond=PINV_RCOND) if A.shape[1] else np.eye(p.dim)
    c = N.T @ p.target
    F = N.T @ p.inputs
    G = F @ F.T
    evals, evecs = np.linalg.eigh(G)
    scale = max(evals.max(initial=0.0), 1.0)
    zero = evals <= 1e-12 * scale
    c_null = evecs[:, zero] @ (evecs[:, zero].T @ c)
    if np.linalg.norm(c_null) > 1e-9 * np.linalg.norm(c):
        y = c_null / (c_null @ c_null)
    else:
        ginv_c = evecs[:, ~zero] @ ((evecs[:, ~zero].T @ c) / evals[~zero])
        y = ginv_c / (c @ ginv_c)
    wp = N @ y
    size = float(np.sum((p.inputs.T @ wp) ** 2))
    return NegativeWitness(wp, size)


def negative_witness_size(p: SpanProgram, wprime) -> float:
    return float(np.sum((p.inputs.T @ np.asarray(wprime, dtype=float)) ** 2))


def check_negative_witness(p: SpanProgram, x, wprime, tol: float = 1e-9) -> bool:
    """Does ``wprime`` pair to 1 with the target and annihilate every available vector?"""
    wprime = np.asarray(wprime, dtype=float)
    A = available_matrix(p, x).matrix
    return bool(abs(wprime @ p.target - 1) <= tol and np.all(np.abs(A.T @ wprime) <= tol))


def check_positive_witness(p: SpanProgram, x, wit: PositiveWitness, tol: float = 1e-9) -> bool:
    mask = p.available_mask(x)
    if np.any(wit.w[~mask] != 0):
        return False
    recon = p.inputs @ wit.w + (p.free @ wit.w_free if p.n_free else 0)
    return bool(np.linalg.norm(recon - p.target) <= tol * max(1.0, np.linalg.norm(p.target)))


@dataclass(frozen=True)
class WitnessSizes:
    W0: float | None  # None when the domain has no 0-inputs
    W1: float | None  # None when the domain has no 1-inputs

    @property
    def W(self) -> float | None:
        if self.W0 is None or self.W1 is None:
            return None
        return float(np.sqrt(self.W0 * self.W1))


def witness_size(p: SpanProgram, domain: Iterable) -> WitnessSizes:
    W0 = W1 = None
    empty = True
    for x in domain:
        empty = False
        if evaluate(p, x):
            s = positive_witness(p, x).size
            W1 = s if W1 is None else max(W1, s)
        else:
            s = negative_witness(p, x).size
            W0 = s if W0 is None else max(W0, s)
    if empty:
        raise SpanProgramError("empty domain")
    return WitnessSizes(W0, W1)


def canonicalize_free(p: SpanProgram, never_available: Sequence = ()) -> SpanProgram:
    """Turn free vectors into inputs labelled by a new variable ``x0`` (index 0) fixed to 1.

    Original variables shift up by one. ``never_available`` vectors are
    appended as inputs labelled ``x0 = 0``.
    """
    never = np.array(list(never_available), dtype=float).reshape(-1, p.dim).T
    inputs = np.hstack([p.free, never, p.inputs])
    ivars = np.concatenate([np.zeros(p.n_free + never.shape[1], dtype=int), p.input_vars + 1])
    ibits = np.concatenate([np.ones(p.n_free, dtype=int), np.zeros(never.shape[1], dtype=int),
                            p.input_bits])
    return SpanProgram(p.target, np.zeros((p.dim, 0)), inputs, ivars, ibits, p.nvars + 1, p.labels)


def extend_assignment(x) -> np.ndarray:
    """Prefix ``x0 = 1`` for programs produced by :func:`canonicalize_free`."""
    return np.concatenate([[1], np.asarray(x, dtype=int).reshape(-1)])
