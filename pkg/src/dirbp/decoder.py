"""Tilted priors, min-sum belief propagation, OSD and exhaustive MAP oracles."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import gf2
from .codes import CssCode, _side
from .enumerator import InconsistentSyndromeError, class_log_partition, degeneracy_classes
from .gf2 import BinaryMatrix

log = logging.getLogger(__name__)

P_FLOOR = 1e-12
P_CEIL = 0.49
TIE_TOL = 1e-9
RANK_RULES = ("llr-cost", "llr-then-directional")

# stands in for an infinite message from a degree-1 check
_BIG = 1e5


@dataclass(frozen=True, eq=False)
class PriorModel:
    p0: float
    beta: float
    p: np.ndarray
    llr: np.ndarray
    clamped: bool = False

    @property
    def n(self) -> int:
        return self.p.size


def tilt(w, p0: float, beta: float) -> tuple[np.ndarray, bool]:
    """Exponentially tilted probabilities with mean ``p0``, clamped to [P_FLOOR, P_CEIL].

    Returns the probabilities and whether clamping changed any of them.
    """
    w = np.asarray(w, dtype=float)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if p0 == 0:
        return np.zeros_like(w), False
    z = beta * w
    z -= z.max(initial=0.0)
    tilted = np.exp(z)
    p = p0 * tilted / tilted.mean()
    clipped = np.clip(p, P_FLOOR, P_CEIL)
    return clipped, bool((clipped != p).any())


def tilt_priors(w, p0: float, beta: float, n: Optional[int] = None) -> PriorModel:
    w = np.asarray(w, dtype=float)
    if n is not None and w.size != n:
        raise ValueError(f"expected {n} weights, got {w.size}")
    if not 0 < p0 < 0.5:
        raise ValueError(f"p0 must lie in (0, 0.5), got {p0}")
    p, clamped = tilt(w, p0, beta)
    if clamped:
        log.warning("tilted priors clamped to [%g, %g]; mean no longer equals p0", P_FLOOR, P_CEIL)
    llr = np.log((1.0 - p) / p)
    p.flags.writeable = False
    llr.flags.writeable = False
    return PriorModel(float(p0), float(beta), p, llr, clamped)


@dataclass(frozen=True)
class DecoderConfig:
    bp_iters: int = 30
    ms_scale: float = 0.8
    osd_order: int = 2
    rank_rule: str = "llr-then-directional"
    early_stop: bool = True
    w: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.bp_iters < 1:
            raise ValueError("bp_iters must be at least 1")
        if not 0 < self.ms_scale <= 1:
            raise ValueError("ms_scale must lie in (0, 1]")
        if self.osd_order < 0:
            raise ValueError("osd_order must be nonnegative")
        if self.rank_rule not in RANK_RULES:
            raise ValueError(f"rank_rule must be one of {RANK_RULES}")


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    estimate: np.ndarray
    bp_converged: bool
    used_osd: bool
    candidate_count: int
    score: float


class MinSum:
    """Flooding normalized min-sum on the Tanner graph of ``h``.

    Holds the message buffers, so use one instance per worker.
    """

    def __init__(self, h):
        h = h if isinstance(h, BinaryMatrix) else BinaryMatrix.from_dense(h)
        self.h = h
        self.m, self.n = h.shape
        chk, var = h.nonzero()
        self.chk = chk
        self.var = var
        n_edges = chk.size
        deg = np.bincount(chk, minlength=self.m)
        self.dmax = int(deg.max(initial=1))
        slot = np.arange(n_edges) - np.repeat(np.cumsum(deg) - deg, deg)
        pad = np.full((self.m, max(self.dmax, 1)), n_edges, dtype=np.intp)
        pad[chk, slot] = np.arange(n_edges)
        self.pad = pad
        self.valid = pad < n_edges
        self.r = np.zeros(n_edges)

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return (np.bincount(self.chk, weights=e[self.var], minlength=self.m).astype(np.int64) & 1).astype(np.uint8)

    def run(self, s, llr, iters: int, scale: float, early_stop: bool = True):
        """Return ``(hard, posterior_llr, converged)``."""
        s = np.asarray(s, dtype=np.uint8)
        llr = np.asarray(llr, dtype=float)
        hard = (llr < 0).astype(np.uint8)
        if early_stop and np.array_equal(self.syndrome(hard), s):
            return hard, llr.copy(), True
        r = self.r
        r[:] = 0.0
        post = llr.copy()
        s_par = s.astype(bool)
        converged = False
        for _ in range(iters):
            q = post[self.var] - r
            qp = np.append(q, _BIG)[self.pad]
            mag = np.abs(qp)
            neg = qp < 0
            parity = np.logical_xor.reduce(neg, axis=1) ^ s_par
            if self.dmax > 1:
                two = np.partition(mag, 1, axis=1)
                m1, m2 = two[:, 0:1], two[:, 1:2]
            else:
                m1 = mag
                m2 = np.full_like(mag, _BIG)
            excl = np.where(mag == m1, m2, m1)
            sign = np.where(parity[:, None] ^ neg, -1.0, 1.0)
            r = (scale * excl * sign)[self.valid]
            post = llr + np.bincount(self.var, weights=r, minlength=self.n)
            hard = (post < 0).astype(np.uint8)
            converged = np.array_equal(self.syndrome(hard), s)
            if converged and early_stop:
                break
        self.r = r
        return hard, post, converged


def minsum_bp(h, s, llr, iters: int = 30, scale: float = 0.8, early_stop: bool = True):
    return MinSum(h).run(s, llr, iters, scale, early_stop)


@dataclass(frozen=True, eq=False)
class OsdResult:
    estimate: np.ndarray
    candidate_count: int
    score: float


def _select(costs: np.ndarray, full: "callable", rank_rule: str, w: Optional[np.ndarray]) -> int:
    best = int(costs.argmin())
    if rank_rule == "llr-cost" or w is None:
        return best
    tied = np.flatnonzero(costs <= costs[best] + TIE_TOL)
    if tied.size == 1:
        return best
    vecs = full(tied)
    dirc = vecs.astype(float) @ w
    near = np.flatnonzero(dirc <= dirc.min() + TIE_TOL)
    # lexicographic: position 0 most significant, smaller vector wins
    keys = [tuple(vecs[i]) for i in near]
    return int(tied[near[min(range(len(near)), key=keys.__getitem__)]])


def osd(h, s, posterior_llr, order: int = 2, rank_rule: str = "llr-then-directional",
        w=None, llr=None) -> OsdResult:
    """Ordered-statistics post-processing.

    Columns are tried as pivots in ascending order of posterior LLR (most
    likely flipped first); the remaining columns form the information set.
    Every flip pattern of weight ``<= order`` on the information set is
    completed to a syndrome-consistent candidate, and candidates are scored
    by ``sum(llr * E)`` with ``llr`` defaulting to the posterior.
    """
    h = h if isinstance(h, BinaryMatrix) else BinaryMatrix.from_dense(h)
    m, n = h.shape
    s = gf2.as_bits(s, m)
    post = np.asarray(posterior_llr, dtype=float)
    cost_llr = post if llr is None else np.asarray(llr, dtype=float)
    w = None if w is None else np.asarray(w, dtype=float)
    if rank_rule not in RANK_RULES:
        raise ValueError(f"rank_rule must be one of {RANK_RULES}")

    col_order = np.argsort(post, kind="stable")
    aug = gf2.pack_rows(np.hstack([h.to_dense(), s[:, None]]))
    words, pivots = gf2._eliminate(aug, col_order.tolist())
    dense = gf2.unpack_rows(words, n + 1)
    rk = len(pivots)
    if dense[rk:, n].any():
        raise InconsistentSyndromeError("syndrome is not in the image of the check matrix")
    piv = np.array(pivots, dtype=np.intp)
    is_piv = np.zeros(n, dtype=bool)
    is_piv[piv] = True
    info = col_order[~is_piv[col_order]]
    A_T = dense[:rk, info].T.copy()
    base = dense[:rk, n]

    patterns = []
    piv_bits = []
    for weight in range(0, min(order, info.size) + 1):
        if weight == 0:
            combos = np.zeros((1, 0), dtype=np.intp)
            bits = base[None, :]
        else:
            combos = np.array(list(itertools.combinations(range(info.size), weight)), dtype=np.intp)
            bits = base[None, :] ^ np.bitwise_xor.reduce(A_T[combos], axis=1)
        patterns.extend(combos)
        piv_bits.append(bits)
    piv_bits = np.vstack(piv_bits)
    info_cost = np.array([cost_llr[info[c]].sum() for c in patterns])
    costs = piv_bits.astype(float) @ cost_llr[piv] + info_cost

    def full(idx):
        out = np.zeros((len(idx), n), dtype=np.uint8)
        for row, i in enumerate(idx):
            out[row, piv] = piv_bits[i]
            out[row, info[patterns[i]]] = 1
        return out

    choice = _select(costs, full, rank_rule, w)
    est = full([choice])[0]
    return OsdResult(est, len(patterns), float(cost_llr @ est))


class BpOsdDecoder:
    """BP followed by OSD when BP does not reach the syndrome."""

    def __init__(self, h, prior: PriorModel, cfg: DecoderConfig = DecoderConfig()):
        self.h = h if isinstance(h, BinaryMatrix) else BinaryMatrix.from_dense(h)
        if prior.n != self.h.cols:
            raise ValueError("prior length does not match the check matrix")
        self.prior = prior
        self.cfg = cfg
        self.bp = MinSum(self.h)

    def decode(self, s) -> DecodeOutcome:
        s = gf2.as_bits(s, self.h.rows)
        llr = self.prior.llr
        if not s.any():
            return DecodeOutcome(np.zeros(self.h.cols, dtype=np.uint8), True, False, 0, 0.0)
        hard, post, ok = self.bp.run(s, llr, self.cfg.bp_iters, self.cfg.ms_scale, self.cfg.early_stop)
        if ok:
            return DecodeOutcome(hard, True, False, 0, float(llr @ hard))
        res = osd(self.h, s, post, self.cfg.osd_order, self.cfg.rank_rule, self.cfg.w, llr=llr)
        return DecodeOutcome(res.estimate, False, True, res.candidate_count, res.score)


def decode(code: CssCode, side: str, s, prior: PriorModel, cfg: DecoderConfig = DecoderConfig()) -> DecodeOutcome:
    """Decode one CSS side; X errors are seen through H_Z and Z errors through H_X."""
    return BpOsdDecoder(code.check_matrix(side), prior, cfg).decode(s)


def map_oracle(code: CssCode, side: str, s, prior: PriorModel, cap: int = 24):
    """Exhaustive coset posterior.

    Returns the lexicographically least member of the most probable class and
    the normalized posterior over classes (ordered as in
    :func:`dirbp.enumerator.degeneracy_classes`).
    """
    classes = degeneracy_classes(code, s, _side(side), cap)
    logz = class_log_partition(classes, prior.llr)
    post = np.exp(logz - logsumexp(logz))
    best = int(np.argmax(logz))
    return classes.reps[best].copy(), post


def coset_key(code: CssCode, side: str, e) -> np.ndarray:
    """Canonical representative of ``e`` modulo the stabilizers of ``side``."""
    return gf2.RowspaceReducer(code.stabilizer_matrix(side)).reduce(e)
