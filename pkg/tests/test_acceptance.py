"""Acceptance suite: thirteen release criteria at their stated tolerances.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line; the lines are also
collected and repeated in the pytest terminal summary. Run standalone with
``python tests/test_acceptance.py`` to get only the thirteen lines.
"""

from __future__ import annotations

import io
import math
import sys
import time

import numpy as np
import pytest

from dirbp import checks, cli, codes, decoder, directional, gf2, sim
from dirbp.decoder import BpOsdDecoder, DecoderConfig

SEED = 2024
LINES: list[str] = []


def report(num: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    LINES.append(line)
    print(line)


def rng(offset: int) -> np.random.Generator:
    return np.random.default_rng([SEED, offset])


@pytest.fixture(scope="module")
def fixtures():
    # toric(3) plus 20 random small CSS codes, n <= 14
    return checks.small_codes(rng(0), 20, n_max=14)


def _suite(num: int, title: str, result: checks.CheckResult, elapsed: float, budget: float) -> None:
    detail = f"cases={result.cases} failures={result.failures} {elapsed:.1f}s"
    ok = result.passed and elapsed < budget
    report(num, title, ok, detail + ("" if elapsed < budget else f" over {budget:.0f}s budget"))
    assert result.passed, result.notes
    assert elapsed < budget


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_01_structure():
    res, dt = _timed(lambda: checks.structural_toric(range(2, 13), distance_upto=4))
    _suite(1, "toric(L) n=2L^2, k=2, commuting, d=L for L<=4", res, dt, 60)


def test_02_enumerator_at_zero(fixtures):
    res, dt = _timed(lambda: checks.enumerator_at_zero(fixtures, rng(3)))
    assert len(fixtures) == 21 and all(c.n <= 18 for c in fixtures)
    _suite(2, "class enumerator equals 2^k at beta=0", res, dt, 300)


def test_03_tail_bound(fixtures):
    res, dt = _timed(lambda: checks.tail_bound(fixtures, rng(4), betas=(0.1, 0.5, 1, 2, 4)))
    _suite(3, "tail count <= e^{beta t} * enumerator", res, dt, 300)


def test_04_distance_sandwich(fixtures):
    res, dt = _timed(lambda: checks.distance_sandwich(fixtures, rng(5), per_code=20))
    _suite(4, "directional distances within [w_min, w_max] * Hamming", res, dt, 300)


def test_05_admissible_chain(fixtures):
    res, dt = _timed(lambda: checks.degeneracy_bound(fixtures, rng(6), thresholds=10))
    _suite(5, "admissible classes <= 2^k f <= 2^(n-2d+2) f, and k <= n-2d+2", res, dt, 120)


def test_06_macwilliams():
    res, dt = _timed(lambda: checks.macwilliams_identity(rng(7), count=50, max_dim=12, alphas=(0.1, 0.5, 1.0)))
    _suite(6, "dual-code enumerator matches direct sum to 1e-10", res, dt, 120)


def test_07_gradient():
    res, dt = _timed(lambda: checks.gradient_identity(rng(8), count=20, step=1e-5, tol=1e-6))
    _suite(7, "analytic gradient vs central differences, rel 1e-6", res, dt, 60)


def test_08_convexity_lipschitz():
    res, dt = _timed(lambda: checks.convexity_lipschitz(rng(9), count=100, slack=1e-10))
    _suite(8, "log-enumerator convex and Lipschitz, slack 1e-10", res, dt, 60)


def test_09_tree_exactness():
    res, dt = _timed(lambda: checks.tree_exactness(rng(10), forests=50, n_max=12))
    _suite(9, "min-sum BP equals weighted min-sum on forests", res, dt, 300)


def test_10_coset_posterior():
    code_list = [codes.toric(2)] + [codes.random_css(int(rng(1).integers(6, 13)), rng(100 + i)) for i in range(8)]
    res, dt = _timed(lambda: checks.coset_posterior(code_list, rng(11), tol=1e-12))
    _suite(10, "coset posteriors match exhaustive summation to 1e-12", res, dt, 120)


def test_11_decoder_sanity():
    t0 = time.perf_counter()
    code = codes.toric(9)
    w = directional.orientation_field(code, "x")
    cfg = DecoderConfig()
    bad = osd_calls = zero_ok = decodes = trials = 0
    # 10^5 trials; the higher-noise share keeps OSD busy
    for p0, count in ((0.005, 50_000), (0.01, 40_000), (0.03, 10_000)):
        prior = decoder.tilt_priors(w, p0, 1.0, code.n)
        channel = sim.channel_model(w, p0, 1.0)
        decs = [(code.check_matrix(side), BpOsdDecoder(code.check_matrix(side), prior,
                                                        sim.decoder_config(cfg, w, 1.0))) for side in ("X", "Z")]
        for i in range(count):
            g = np.random.default_rng(sim.trial_seed(11, trials))
            trials += 1
            for h, dec in decs:
                e = sim.sample_error(channel.p_x, g)
                s = h.matvec(e)
                out = dec.decode(s)
                decodes += 1
                osd_calls += out.used_osd
                if not s.any():
                    zero_ok += 1
                    bad += bool(out.estimate.any())
                elif not np.array_equal(h.matvec(out.estimate), s):
                    bad += 1
    zero = decs[0][1].decode(np.zeros(code.check_matrix("X").rows, dtype=np.uint8))
    bad += bool(zero.estimate.any())
    dt = time.perf_counter() - t0
    ok = bad == 0 and trials == 100_000 and dt < 600
    report(11, "toric(9) decoder: zero syndrome -> zero, every estimate matches its syndrome", ok,
           f"trials={trials} decodes={decodes} zero_syndromes={zero_ok} osd={osd_calls} violations={bad} {dt:.0f}s")
    assert bad == 0 and trials == 100_000
    assert dt < 600


def test_12_matched_vs_isotropic():
    t0 = time.perf_counter()
    code = codes.toric(9)
    w = directional.orientation_field(code, "x")
    cfg = DecoderConfig()
    trials = 20_000
    wins = 0
    parts = []
    for p0 in (3e-3, 5e-3, 1e-2):
        channel = sim.channel_model(w, p0, 1.0)
        tilted = sim.monte_carlo(code, channel, 1.0, cfg, trials, SEED)
        flat = sim.monte_carlo(code, channel, 0.0, cfg, trials, SEED)
        separated = tilted.ler < flat.ler and tilted.ci_high < flat.ci_low
        wins += separated
        ratio = flat.ler / tilted.ler if tilted.ler > 0 else (math.inf if flat.ler > 0 else float("nan"))
        parts.append(f"p0={p0:g}: {tilted.fail_any}/{trials} vs {flat.fail_any}/{trials} ratio={ratio:.3g}")
    dt = time.perf_counter() - t0
    report(12, "matched decoder beats isotropic with disjoint 95% Wilson CIs at >= 2 of 3 points",
           wins >= 2, "; ".join(parts) + f" ({dt:.0f}s)")
    assert wins >= 2, parts


def test_13_determinism(tmp_path):
    t0 = time.perf_counter()
    args = ["sweep-p", "--toric", "9", "--p0-list", "0.02,0.04", "--trials", "1500", "--seed", "13"]
    a, b = tmp_path / "w1.csv", tmp_path / "w3.csv"
    rc_a = cli.main(args + ["--workers", "1", "--out", str(a)], out=io.StringIO())
    rc_b = cli.main(args + ["--workers", "3", "--out", str(b)], out=io.StringIO())
    same = rc_a == rc_b == 0 and a.read_bytes() == b.read_bytes()
    dt = time.perf_counter() - t0
    report(13, "byte-identical CSV across --workers 1 and 3", same and dt < 300, f"{dt:.0f}s")
    assert same
    assert dt < 300


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
