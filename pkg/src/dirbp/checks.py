"""Invariant suites shared by ``dirbp verify`` and the acceptance tests.

Each suite draws its fixtures from a seeded generator, checks an identity or
inequality case by case against an independent brute-force computation, and
returns a :class:`CheckResult` with the number of cases and failures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import codes, decoder, directional, enumerator, gf2
from .codes import CssCode
from .gf2 import BinaryMatrix

REL_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def record(self, ok: bool, note: str = "") -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44} cases={self.cases} failures={self.failures}"


def small_codes(rng: np.random.Generator, count: int, n_max: int = 14) -> list[CssCode]:
    """toric(3) followed by ``count`` random CSS codes with 6 <= n <= n_max."""
    out = [codes.toric(3)]
    for _ in range(count):
        out.append(codes.random_css(int(rng.integers(6, n_max + 1)), rng))
    return out


def random_subcode(rng: np.random.Generator, n: int, dim: int) -> BinaryMatrix:
    while True:
        g = rng.integers(0, 2, (dim, n)).astype(np.uint8)
        if gf2.rank(g) == dim:
            return BinaryMatrix.from_dense(g)


def _codewords(basis: BinaryMatrix) -> np.ndarray:
    return np.vstack([gf2.unpack_rows(c, basis.cols) for c in gf2.span_chunks(basis)])


def _all_vectors(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)


def structural_toric(sizes: Sequence[int] = range(2, 13), distance_upto: int = 4) -> CheckResult:
    res = CheckResult("toric family structure")
    for L in sizes:
        c = codes.toric(L)
        ok = c.n == 2 * L * L and c.k == 2 and not c.h_x.mul_transpose(c.h_z).any()
        if L <= distance_upto:
            ok = ok and codes.distances(c).d == L
        res.record(ok, f"L={L}")
    return res


def edge_reduction(rng: np.random.Generator, count: int = 20) -> CheckResult:
    res = CheckResult("edge-to-qubit reduction")
    for i in range(count):
        c = codes.toric(3) if i % 2 == 0 else codes.random_css(int(rng.integers(6, 13)), rng)
        dx = c.h_x.to_dense() * rng.uniform(0, 2, c.h_x.shape)
        dz = c.h_z.to_dense() * rng.uniform(0, 2, c.h_z.shape)
        ew = directional.EdgeWeights.for_code(c, dx, dz)
        w = directional.per_qubit_from_edges(ew)
        E = rng.integers(0, 2, c.n)
        a = directional.directional_cost(w, E)
        b = directional.edge_cost(ew, E)
        res.record(math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12), f"{a} vs {b}")
    return res


def enumerator_at_zero(code_list: Sequence[CssCode], rng: np.random.Generator) -> CheckResult:
    res = CheckResult("enumerator equals 2^k at beta=0")
    for c in code_list:
        w = rng.uniform(-2, 2, c.n)
        for s in enumerator.all_syndromes(c):
            rep = enumerator.class_score_table(c, s, w).enumerator(0.0)
            res.record(rep.value == 2.0 ** c.k, f"{c!r}: {rep.value}")
    return res


def tail_bound(code_list: Sequence[CssCode], rng: np.random.Generator,
               betas: Sequence[float] = (0.1, 0.5, 1, 2, 4)) -> CheckResult:
    res = CheckResult("low-cost class tail bound")
    for c in code_list:
        w = rng.uniform(0, 2, c.n)
        for s in enumerator.all_syndromes(c):
            table = enumerator.class_score_table(c, s, w)
            for t in np.unique(table.scores):
                m_t = table.tail_count(t)
                for beta in betas:
                    bound = math.exp(beta * t) * table.enumerator(beta).value
                    res.record(m_t <= bound * (1 + REL_TOL), f"{c!r} beta={beta} t={t}: {m_t} > {bound}")
    return res


def distance_sandwich(code_list: Sequence[CssCode], rng: np.random.Generator, per_code: int = 20) -> CheckResult:
    res = CheckResult("directional vs Hamming distance sandwich")
    for c in code_list:
        dist = codes.distances(c)
        for _ in range(per_code):
            w = rng.uniform(0, 2, c.n)
            dws, dwl = enumerator.directional_distances(c, w)
            lo, hi = w.min(), w.max()
            ok = lo * dist.d_s <= dws <= hi * dist.d_s and lo * dist.d <= dwl <= hi * dist.d
            res.record(ok, f"{c!r}: d_s={dist.d_s} d={dist.d} dws={dws} dwl={dwl}")
    return res


def degeneracy_bound(code_list: Sequence[CssCode], rng: np.random.Generator, thresholds: int = 10) -> CheckResult:
    res = CheckResult("admissible class count bound")
    for c in code_list:
        d = codes.distances(c).d
        res.record(c.k <= c.n - 2 * d + 2, f"{c!r}: singleton k={c.k} d={d}")
        w = rng.uniform(0, 2, c.n)
        tables = [enumerator.class_score_table(c, s, w) for s in enumerator.all_syndromes(c)]
        lo = min(t.scores.min() for t in tables)
        hi = max(t.scores.max() for t in tables)
        grid = np.linspace(lo - 0.1, hi, thresholds)
        prev = 0.0
        for t in grid:
            f = max(tab.admissible_fraction(t) for tab in tables)
            ok = 0.0 <= f <= 1.0 and f >= prev
            prev = f
            for tab in tables:
                adm = tab.tail_count(t)
                ok = ok and adm <= 2 ** c.k * f <= 2.0 ** (c.n - 2 * d + 2) * f
            res.record(ok, f"{c!r} t={t}")
    return res


def macwilliams_identity(rng: np.random.Generator, count: int = 50, max_dim: int = 12,
                         alphas: Sequence[float] = (0.1, 0.5, 1.0)) -> CheckResult:
    res = CheckResult("MacWilliams dual enumerator")
    for _ in range(count):
        n = int(rng.integers(4, 15))
        dim = int(rng.integers(1, min(max_dim, n - 1) + 1))
        basis = random_subcode(rng, n, dim)
        w = rng.uniform(-3, 3, n)
        for a in alphas:
            direct = enumerator.global_enumerator(basis, w, a)
            dual = enumerator.macwilliams_enumerator(basis, w, a)
            res.record(abs(direct - dual) <= 1e-10 * abs(direct), f"n={n} dim={dim} a={a}: {direct} vs {dual}")
    return res


def gradient_identity(rng: np.random.Generator, count: int = 20, step: float = 1e-5, tol: float = 1e-6) -> CheckResult:
    res = CheckResult("enumerator gradient vs finite differences")
    for _ in range(count):
        n = int(rng.integers(4, 13))
        basis = random_subcode(rng, n, int(rng.integers(1, n)))
        w = rng.uniform(-1, 1, n)
        a = float(rng.choice([0.5, 1.0]))
        g = enumerator.enumerator_gradient(basis, w, a)
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fd[i] = (enumerator.log_global_enumerator(basis, w + e, a)
                     - enumerator.log_global_enumerator(basis, w - e, a)) / (2 * step)
        err = np.abs(g - fd).max() / max(np.abs(g).max(), 1e-300)
        res.record(err <= tol and ((g >= 0) & (g <= a)).all(), f"n={n}: rel err {err:.2e}")
    return res


def convexity_lipschitz(rng: np.random.Generator, count: int = 100, slack: float = 1e-10) -> CheckResult:
    res = CheckResult("log-enumerator convexity and Lipschitz bound")
    for _ in range(count):
        n = int(rng.integers(4, 13))
        basis = random_subcode(rng, n, int(rng.integers(1, n)))
        a = float(rng.choice([0.1, 0.5, 1.0]))
        w1, w2 = rng.uniform(-3, 3, n), rng.uniform(-3, 3, n)
        delta = rng.uniform(-0.5, 0.5, n)
        lam = float(rng.uniform(0.01, 0.99))
        lg = lambda w: enumerator.log_global_enumerator(basis, w, a)  # noqa: E731
        convex = lg(lam * w1 + (1 - lam) * w2) <= lam * lg(w1) + (1 - lam) * lg(w2) + slack
        lips = abs(lg(w1 + delta) - lg(w1)) <= a * n * np.abs(delta).max() + slack
        res.record(convex and lips, f"n={n} a={a}")
    return res


def tree_exactness(rng: np.random.Generator, forests: int = 50, n_max: int = 12) -> CheckResult:
    res = CheckResult("min-sum exactness on forests")
    made = 0
    while made < forests:
        n = int(rng.integers(3, n_max + 1))
        h = codes.random_forest(n, int(rng.integers(1, n)), rng)
        if h.rows == 0:
            continue
        made += 1
        codes.tree_code(h)
        E = _all_vectors(n)
        synd = (E @ h.to_dense().T % 2).astype(np.uint8)
        p = rng.uniform(0.01, 0.49, n)
        llr = np.log((1 - p) / p)
        costs = E @ llr
        bp = decoder.MinSum(h)
        keys = {}
        for idx, s in enumerate(synd):
            keys.setdefault(s.tobytes(), []).append(idx)
        for members in keys.values():
            members = np.array(members)
            best = E[members[np.argmin(costs[members])]]
            # run to the fixed point: a syndrome-satisfying hard decision can appear
            # before messages have crossed the whole tree
            hard, _, _ = bp.run(synd[members[0]], llr, max(30, 2 * n), 1.0, early_stop=False)
            res.record(np.array_equal(hard, best), f"n={n}")
    return res


def coset_posterior(code_list: Sequence[CssCode], rng: np.random.Generator, tol: float = 1e-12) -> CheckResult:
    """Posteriors from the class sweep vs summing Pr(E) over all 2^n error patterns."""
    res = CheckResult("coset posterior oracle")
    for c in code_list:
        if c.n > 12:
            continue
        p = rng.uniform(0.01, 0.3, c.n)
        prior = decoder.PriorModel(float(p.mean()), 0.0, p, np.log((1 - p) / p))
        E = _all_vectors(c.n)
        probs = np.prod(np.where(E == 1, p, 1 - p), axis=1)
        for side in ("X", "Z"):
            h = c.check_matrix(side).to_dense()
            synd = E @ h.T % 2
            reducer = gf2.RowspaceReducer(c.stabilizer_matrix(side))
            for s in enumerator.all_syndromes(c, side):
                classes = enumerator.degeneracy_classes(c, s, side)
                _, post = decoder.map_oracle(c, side, s, prior)
                mask = (synd == s).all(axis=1)
                keys = reducer.reduce_packed(gf2.pack_rows(E[mask]))
                reps = reducer.reduce_packed(gf2.pack_rows(classes.reps))
                mass = np.array([probs[mask][(keys == r).all(axis=1)].sum() for r in reps])
                oracle = mass / mass.sum()
                err = np.abs(post - oracle).max() / oracle.max()
                res.record(err <= tol, f"{c!r} side={side}: {err:.2e}")
    return res


SuiteFn = Callable[[], CheckResult]


def default_suites(seed: int = 2024, scale: float = 1.0) -> list[SuiteFn]:
    """Suites at acceptance size (``scale=1``) or reduced for a quick run."""

    def n(count: int) -> int:
        return max(1, int(round(count * scale)))

    def rng(offset: int) -> np.random.Generator:
        return np.random.default_rng([seed, offset])

    fixtures = small_codes(rng(0), n(20))
    posterior_codes = [codes.toric(2)] + [codes.random_css(int(rng(1).integers(6, 11)), rng(100 + i))
                                          for i in range(n(6))]
    return [
        lambda: structural_toric(range(2, 13) if scale >= 1 else range(2, 7)),
        lambda: edge_reduction(rng(2), n(20)),
        lambda: enumerator_at_zero(fixtures, rng(3)),
        lambda: tail_bound(fixtures, rng(4)),
        lambda: distance_sandwich(fixtures, rng(5), n(20)),
        lambda: degeneracy_bound(fixtures, rng(6)),
        lambda: macwilliams_identity(rng(7), n(50)),
        lambda: gradient_identity(rng(8), n(20)),
        lambda: convexity_lipschitz(rng(9), n(100)),
        lambda: tree_exactness(rng(10), n(50)),
        lambda: coset_posterior(posterior_codes, rng(11)),
    ]


def run_all(seed: int = 2024, scale: float = 1.0, echo: Callable[[str], None] = print) -> bool:
    ok = True
    for suite in default_suites(seed, scale):
        result = suite()
        echo(result.line())
        for note in result.notes:
            echo(f"      {note}")
        ok = ok and result.passed
    return ok
