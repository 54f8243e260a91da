import csv
import io
import json

import numpy as np
import pytest
from scipy.stats import norm

from dirbp import codes, directional as di, gf2, sim
from dirbp.decoder import DecoderConfig


def test_sample_error_extremes():
    rng = np.random.default_rng(0)
    assert not sim.sample_error(np.zeros(10), rng).any()
    assert sim.sample_error(np.ones(10), rng).all()


def test_sample_error_marginals():
    rng = np.random.default_rng(1)
    p = np.array([0.001, 0.01, 0.1, 0.3])
    draws = np.array([sim.sample_error(p, rng) for _ in range(100_000)])
    sigma = np.sqrt(p * (1 - p) / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - p) <= 4 * sigma)


def test_failure_judging():
    code = codes.toric(3)
    rng = np.random.default_rng(2)
    e = (rng.random(18) < 0.2).astype(np.uint8)
    assert not sim.is_logical_failure(code, "X", e, e)
    assert not sim.is_logical_failure(code, "X", e, e ^ code.h_x.to_dense()[4])
    loop = np.zeros(18, dtype=np.uint8)
    loop[[codes.toric_index(3, 0, y, False) for y in range(3)]] = 1
    assert not code.h_z.matvec(loop).any()
    assert not gf2.in_rowspace(code.h_x, loop)
    assert sim.is_logical_failure(code, "X", e, e ^ loop)


def test_failure_judging_matches_logical_inner_products():
    # oracle: the residual is a logical failure iff it anticommutes with some Z logical
    code = codes.toric(3)
    z_logicals = []
    for v in gf2.nullspace_basis(code.h_x).to_dense():
        if not gf2.in_rowspace(code.h_z, v):
            z_logicals.append(v)
    rng = np.random.default_rng(3)
    for _ in range(300):
        e = (rng.random(18) < 0.3).astype(np.uint8)
        s = code.h_z.matvec(e)
        est = gf2.solve(code.h_z, s) ^ gf2.nullspace_basis(code.h_z).to_dense()[int(rng.integers(10))]
        residual = e ^ est
        oracle = any(int(residual @ z) % 2 for z in z_logicals)
        assert sim.is_logical_failure(code, "X", e, est) == oracle


def test_failure_syndrome_mismatch_guard():
    code = codes.toric(3)
    e = np.zeros(18, dtype=np.uint8)
    bad = e.copy()
    bad[0] = 1
    with pytest.raises(RuntimeError):
        sim.is_logical_failure(code, "X", e, bad)


def test_run_trial_zero_noise():
    code = codes.toric(3)
    ch = sim.channel_model(np.zeros(18), 0.0, 0.0)
    assert sim.run_trial(code, ch, None, None, DecoderConfig(), 5) == (False, False)


def test_run_trial_deterministic():
    code = codes.toric(3)
    w = di.orientation_field(code)
    ch = sim.channel_model(w, 0.1, 1.0)
    px, pz = sim.decoder_priors(ch, 1.0, code.n)
    outs = {sim.run_trial(code, ch, px, pz, DecoderConfig(), sim.trial_seed(9, i)) for i in [3, 3, 3]}
    assert len(outs) == 1


def test_above_threshold_fails():
    code = codes.toric(3)
    ch = sim.channel_model(np.zeros(18), 0.3, 0.0)
    res = sim.monte_carlo(code, ch, 0.0, DecoderConfig(), 1000, 4)
    assert res.fail_any > 0


def test_monte_carlo_zero_noise():
    code = codes.toric(3)
    res = sim.monte_carlo(code, sim.channel_model(np.zeros(18), 0.0, 0.0), 0.0, DecoderConfig(), 10, 0)
    assert res.ler == 0 and res.ci_low == 0 and res.trials == 10


def test_monte_carlo_independent_of_workers():
    code = codes.toric(3)
    ch = sim.channel_model(di.orientation_field(code), 0.08, 1.0)
    a = sim.monte_carlo(code, ch, 1.0, DecoderConfig(), 600, 11, workers=1, block=100)
    b = sim.monte_carlo(code, ch, 1.0, DecoderConfig(), 600, 11, workers=3, block=100)
    c = sim.monte_carlo(code, ch, 1.0, DecoderConfig(), 600, 11, workers=1, block=250)
    assert a == b == c


def test_trial_seeds_distinct():
    seeds = {sim.trial_seed(5, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    assert sim.trial_seed(5, 0) != sim.trial_seed(6, 0)


def test_wilson_coverage():
    rng = np.random.default_rng(12)
    covered = 0
    for _ in range(1000):
        p = float(rng.uniform(0.001, 0.2))
        n = int(rng.integers(50, 2000))
        k = int(rng.binomial(n, p))
        lo, hi = sim.wilson_interval(k, n)
        covered += lo <= p <= hi
    assert covered >= 930


def test_wilson_known_value():
    # closed form for the Wilson score interval
    k, n = 7, 100
    z = norm.ppf(0.975)
    ph = k / n
    centre = (ph + z * z / (2 * n)) / (1 + z * z / n)
    half = z * np.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    lo, hi = sim.wilson_interval(k, n)
    assert lo == pytest.approx(centre - half, rel=1e-9)
    assert hi == pytest.approx(centre + half, rel=1e-9)


def test_decoder_config_tie_weights():
    w = np.array([1.0, -2.0])
    assert sim.decoder_config(DecoderConfig(), w, 0.0).w is None
    assert np.array_equal(sim.decoder_config(DecoderConfig(), w, 2.0).w, 2 * w)


def _read(text):
    return list(csv.reader(io.StringIO(text)))


def test_sweep_single_point_matches_monte_carlo(tmp_path):
    code = codes.toric(3)
    w = di.orientation_field(code)
    pt = sim.GridPoint(0.05, 1.0, 1.0)
    out = tmp_path / "s.csv"
    rows = sim.sweep(code, [pt], w, DecoderConfig(), 300, 8, out_path=out)
    direct = sim.monte_carlo(code, sim.channel_model(w, 0.05, 1.0), 1.0, DecoderConfig(), 300, 8)
    assert rows[0][1] == direct
    table = _read(out.read_text())
    assert table[0] == sim.CSV_HEADER
    assert table[1] == sim.csv_row(code, pt, direct)
    meta = json.loads((tmp_path / "s.csv.json").read_text())
    assert meta["assumption"] == sim.ASSUMPTION


def test_sweep_beta_has_baseline_row():
    code = codes.toric(3)
    w = di.orientation_field(code)
    buf = io.StringIO()
    grid = [sim.GridPoint(0.05, 1.0, b) for b in (0.0, 1.0)]
    sim.sweep(code, grid, w, DecoderConfig(), 50, 1, stream=buf)
    rows = _read(buf.getvalue())
    assert len(rows) == 3 and rows[1][5] == "0.0"


def test_sweep_empty_grid():
    with pytest.raises(ValueError):
        sim.sweep(codes.toric(3), [], np.zeros(18), DecoderConfig(), 10, 0)


def test_sweep_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        sim.sweep(codes.toric(3), [sim.GridPoint(0.01, 0, 0)], np.zeros(18), DecoderConfig(), 5, 0,
                  out_path=tmp_path / "missing" / "x.csv")


def test_p_sweep_monotone_within_ci():
    code = codes.toric(9)
    w = di.orientation_field(code)
    grid = [sim.GridPoint(p, 1.0, 1.0) for p in (0.02, 0.04, 0.06, 0.08, 0.1)]
    rows = sim.sweep(code, grid, w, DecoderConfig(), 200, 3, stream=io.StringIO())
    for (_, a), (_, b) in zip(rows, rows[1:]):
        assert b.ci_high >= a.ci_low
    assert rows[-1][1].ler > rows[0][1].ler
    assert all(type(r.ci_low) is float and type(r.ci_high) is float for _, r in rows)
