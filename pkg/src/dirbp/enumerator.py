"""Degeneracy classes, directional class scores and enumerators.

Everything here is exhaustive: classes are enumerated explicitly and each
class is swept over its full stabilizer coset, so these routines are meant
for codes whose relevant subspaces have dimension at most ``CAP``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import mpmath
import numpy as np
from scipy.special import logsumexp

from . import gf2
from .codes import CssCode, _side
from .gf2 import BinaryMatrix, CapExceededError

CAP = 24


class InconsistentSyndromeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DegeneracyClasses:
    """The quotient ``(e0 + ker H) / rowsp(S)`` for one syndrome.

    ``reps[c]`` is the lexicographically least member of class ``c``; class
    0 is the one containing ``e0``.
    """

    code: CssCode
    side: str
    syndrome: np.ndarray
    e0: np.ndarray
    reps: np.ndarray
    logicals: np.ndarray
    stabilizers: BinaryMatrix

    @property
    def count(self) -> int:
        return self.reps.shape[0]


@dataclass(frozen=True, eq=False)
class ClassScoreTable:
    classes: DegeneracyClasses
    scores: np.ndarray
    leaders: np.ndarray

    @property
    def syndrome(self) -> np.ndarray:
        return self.classes.syndrome

    @property
    def reps(self) -> np.ndarray:
        return self.classes.reps

    def enumerator(self, beta: float) -> "EnumeratorReport":
        return _report(self.scores, beta)

    def tail_count(self, t: float) -> int:
        return int(np.count_nonzero(self.scores <= t))

    def admissible_fraction(self, t: float) -> float:
        return self.tail_count(t) / self.scores.size


@dataclass(frozen=True)
class EnumeratorReport:
    beta: float
    value: float
    log_value: float
    mean_score: float
    var_score: float


def logical_representatives(code: CssCode, side: str = "X") -> np.ndarray:
    """k vectors completing the stabilizer rowspace to ``ker`` of the check matrix.

    Rows are reduced against the stabilizer RREF, so every nonzero
    combination of them is a nontrivial logical operator.
    """
    side = _side(side)
    reducer = gf2.RowspaceReducer(code.stabilizer_matrix(side))
    ker = gf2.nullspace_basis(code.check_matrix(side))
    reduced = reducer.reduce_packed(ker.words) if ker.rows else ker.words
    rref, piv = gf2.row_reduce(BinaryMatrix(reduced, ker.rows, code.n))
    return rref.to_dense()[: len(piv)]


def degeneracy_classes(code: CssCode, syndrome, side: str = "X", cap: int = CAP) -> DegeneracyClasses:
    side = _side(side)
    h = code.check_matrix(side)
    kernel_dim = code.n - gf2.rank(h)
    if kernel_dim > cap:
        raise CapExceededError(f"solution space has 2^{kernel_dim} elements, cap is 2^{cap}")
    s = gf2.as_bits(syndrome, h.rows)
    e0 = gf2.solve(h, s)
    if e0 is None:
        raise InconsistentSyndromeError("syndrome is not in the image of the check matrix")
    stab = code.stabilizer_matrix(side)
    reducer = gf2.RowspaceReducer(stab)
    logicals = logical_representatives(code, side)
    r0 = reducer.reduce(e0)
    reps = np.vstack([gf2.unpack_rows(c, code.n) for c in gf2.span_chunks(logicals, r0, cap=cap)])
    return DegeneracyClasses(code, side, s, e0, reps, logicals, reducer.basis())


def _cost_chunks(classes: DegeneracyClasses, w: np.ndarray) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(members, costs)`` with ``costs[j, c]`` the cost of ``reps[c] ^ members[j]``.

    ``members`` runs over the stabilizer span in counting order.
    """
    reps = classes.reps.astype(float)
    base = reps @ w
    flip = (w[:, None] * (1.0 - 2.0 * reps.T))
    for chunk in gf2.span_chunks(classes.stabilizers, cap=CAP):
        u = gf2.unpack_rows(chunk, classes.code.n)
        yield u, base[None, :] + u.astype(float) @ flip


def score_classes(classes: DegeneracyClasses, w) -> ClassScoreTable:
    """Minimum-cost member (weighted coset leader) of every class."""
    w = np.asarray(w, dtype=float)
    n_cls = classes.count
    best = np.full(n_cls, np.inf)
    leaders = classes.reps.copy()
    for u, costs in _cost_chunks(classes, w):
        idx = costs.argmin(axis=0)
        vals = costs[idx, np.arange(n_cls)]
        better = vals < best
        if better.any():
            best[better] = vals[better]
            leaders[better] = classes.reps[better] ^ u[idx[better]]
    scores = np.array([math.fsum(w[row.astype(bool)]) for row in leaders])
    return ClassScoreTable(classes, scores, leaders)


def class_log_partition(classes: DegeneracyClasses, w) -> np.ndarray:
    """``log sum_{v in class} exp(-<w, v>)`` for every class."""
    w = np.asarray(w, dtype=float)
    acc = np.full(classes.count, -np.inf)
    for _, costs in _cost_chunks(classes, w):
        acc = np.logaddexp(acc, logsumexp(-costs, axis=0))
    return acc


def class_score_table(code: CssCode, syndrome, w, side: str = "X", cap: int = CAP) -> ClassScoreTable:
    return score_classes(degeneracy_classes(code, syndrome, side, cap), w)


def class_score(code: CssCode, class_rep, w, side: str = "X", cap: int = CAP) -> float:
    """Cost of the cheapest member of ``class_rep + rowsp(stabilizers)``."""
    stab = gf2.RowspaceReducer(code.stabilizer_matrix(side)).basis()
    if stab.rows > cap:
        raise CapExceededError(f"stabilizer group of dimension {stab.rows} exceeds cap {cap}")
    w = np.asarray(w, dtype=float)
    best = np.inf
    best_vec = None
    for chunk in gf2.span_chunks(stab, gf2.as_bits(class_rep, code.n), cap=cap):
        v = gf2.unpack_rows(chunk, code.n)
        costs = v.astype(float) @ w
        i = int(costs.argmin())
        if costs[i] < best:
            best, best_vec = costs[i], v[i]
    return math.fsum(w[best_vec.astype(bool)])


def _report(scores: np.ndarray, beta: float) -> EnumeratorReport:
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    expo = -beta * scores
    log_gamma = float(logsumexp(expo))
    probs = np.exp(expo - log_gamma)
    mean = float(probs @ scores)
    var = float(probs @ (scores - mean) ** 2)
    if np.abs(expo).max() < 700:
        value = math.fsum(np.exp(expo))
    else:
        value = math.exp(log_gamma) if log_gamma < 709 else math.inf
    return EnumeratorReport(beta=float(beta), value=value, log_value=log_gamma, mean_score=mean, var_score=var)


def directional_enumerator(code: CssCode, syndrome, w, beta: float, side: str = "X",
                           cap: int = CAP) -> EnumeratorReport:
    """Sum over classes of ``exp(-beta * score)``.

    The mean and variance fields are the Gibbs mean and variance of the class
    score at ``beta`` (minus the first and the second derivative of the log
    enumerator); at ``beta = 0`` they are the plain mean and variance.
    """
    return class_score_table(code, syndrome, w, side, cap).enumerator(beta)


def tail_count(code: CssCode, syndrome, w, t: float, side: str = "X", cap: int = CAP) -> int:
    return class_score_table(code, syndrome, w, side, cap).tail_count(t)


def admissible_fraction(code: CssCode, syndrome, w, t: float, side: str = "X", cap: int = CAP) -> float:
    return class_score_table(code, syndrome, w, side, cap).admissible_fraction(t)


def all_syndromes(code: CssCode, side: str = "X", cap: int = CAP) -> Iterator[np.ndarray]:
    """Every syndrome reachable by some error on ``side``, each exactly once."""
    h = code.check_matrix(side)
    _, piv = gf2.row_reduce(h)
    cols = BinaryMatrix.from_dense(h.to_dense()[:, piv].T.copy(), cols=h.rows)
    for chunk in gf2.span_chunks(cols, cap=cap):
        yield from gf2.unpack_rows(chunk, h.rows)


def concentration_factor(code: CssCode, w, t: float, side: str = "X", cap: int = CAP) -> float:
    """Worst case over syndromes of the admissible fraction under the threshold rule."""
    return max(admissible_fraction(code, s, w, t, side, cap) for s in all_syndromes(code, side, cap))


def _min_nonzero_span_cost(h: BinaryMatrix, w: np.ndarray, cap: int) -> Optional[float]:
    basis = gf2.RowspaceReducer(h).basis()
    if basis.rows == 0:
        return None
    if basis.rows > cap:
        raise CapExceededError(f"stabilizer dimension {basis.rows} exceeds cap {cap}")
    best, best_vec = np.inf, None
    for chunk in gf2.span_chunks(basis, cap=cap):
        v = gf2.unpack_rows(chunk, h.cols)
        costs = v.astype(float) @ w
        costs[~v.any(axis=1)] = np.inf
        i = int(costs.argmin())
        if costs[i] < best:
            best, best_vec = costs[i], v[i]
    return math.fsum(w[best_vec.astype(bool)])


def directional_distances(code: CssCode, w, cap: int = CAP) -> tuple[Optional[float], Optional[float]]:
    """Minimum directional cost over nontrivial stabilizers and over nontrivial logicals."""
    w = np.asarray(w, dtype=float)
    if (w < 0).any():
        raise ValueError("directional distances need nonnegative weights")
    stab = [c for c in (_min_nonzero_span_cost(code.h_x, w, cap), _min_nonzero_span_cost(code.h_z, w, cap))
            if c is not None]
    logical = []
    for side in ("X", "Z"):
        h = code.check_matrix(side)
        table = class_score_table(code, np.zeros(h.rows, dtype=np.uint8), w, side, cap)
        if table.scores.size > 1:
            logical.append(float(table.scores[1:].min()))
    return (min(stab) if stab else None, min(logical) if logical else None)


def intersection_basis(code: CssCode) -> BinaryMatrix:
    """Basis of ``ker(H_X) ∩ ker(H_Z)``."""
    return gf2.nullspace_basis(code.h_x.vstack(code.h_z))


def _as_basis(code_or_basis) -> BinaryMatrix:
    if isinstance(code_or_basis, CssCode):
        return intersection_basis(code_or_basis)
    if isinstance(code_or_basis, BinaryMatrix):
        return code_or_basis
    return BinaryMatrix.from_dense(code_or_basis)


def _codewords(basis: BinaryMatrix, cap: int) -> np.ndarray:
    if basis.rows > cap:
        raise CapExceededError(f"code dimension {basis.rows} exceeds cap {cap}")
    return np.vstack([gf2.unpack_rows(c, basis.cols) for c in gf2.span_chunks(basis, cap=cap)])


def log_global_enumerator(code_or_basis, w, alpha: float, cap: int = CAP) -> float:
    basis = _as_basis(code_or_basis)
    V = _codewords(basis, cap).astype(float)
    return float(logsumexp(alpha * (V @ np.asarray(w, dtype=float))))


def global_enumerator(code_or_basis, w, alpha: float, cap: int = CAP) -> float:
    """Direct sum of ``exp(alpha <w, v>)`` over ``C = ker H_X ∩ ker H_Z`` (or a given basis)."""
    return math.exp(log_global_enumerator(code_or_basis, w, alpha, cap))


def macwilliams_enumerator(code_or_basis, w, alpha: float, cap: int = CAP) -> float:
    """The same quantity evaluated through the dual code.

    Terms of the dual sum alternate in sign; when the float64 sum loses more
    than a few digits to cancellation it is recomputed with mpmath at a
    precision sized to the observed cancellation.
    """
    basis = _as_basis(code_or_basis)
    dual = gf2.nullspace_basis(basis)
    U = _codewords(dual, cap)
    size = U.shape[0]
    w = np.asarray(w, dtype=float)
    a = np.exp(alpha * w)
    # a factor (1 - a_i) that is exactly zero kills every dual word using qubit i
    zero = (1.0 - a) == 0
    U = U[~U[:, zero].any(axis=1)]
    log_plus = np.log1p(a)
    log_minus = np.log(np.abs(np.where(zero, 1.0, 1.0 - a)))
    neg = (1.0 - a) < 0
    Uf = U.astype(float)
    logmag = log_plus.sum() + Uf @ (log_minus - log_plus)
    sign = np.where((U[:, neg].sum(axis=1) % 2) == 1, -1.0, 1.0)
    top = logmag.max()
    scaled = sign * np.exp(logmag - top)
    total = math.fsum(scaled)
    absolute = math.fsum(np.abs(scaled))
    if total > 0 and absolute / total * (w.size + 2) * 2.2e-16 < 1e-14:
        return math.exp(top) * total / size
    digits = 30 + int(math.log10(absolute / abs(total))) if total != 0 else 60
    with mpmath.workdps(digits):
        ea = [mpmath.exp(mpmath.mpf(alpha) * mpmath.mpf(float(x))) for x in w]
        acc = mpmath.mpf(0)
        for u in U:
            term = mpmath.mpf(1)
            for ai, ui in zip(ea, u):
                term *= (1 - ai) if ui else (1 + ai)
            acc += term
        return float(acc / size)


def enumerator_gradient(code_or_basis, w, alpha: float, cap: int = CAP) -> np.ndarray:
    """Gradient of the log global enumerator: ``alpha`` times the Gibbs occupation of each qubit."""
    basis = _as_basis(code_or_basis)
    V = _codewords(basis, cap).astype(float)
    expo = alpha * (V @ np.asarray(w, dtype=float))
    probs = np.exp(expo - logsumexp(expo))
    return alpha * (probs @ V)
