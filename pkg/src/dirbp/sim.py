"""Code-capacity Monte Carlo for anisotropic BP+OSD decoding."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from . import gf2
from .codes import CssCode, _side
from .decoder import BpOsdDecoder, DecoderConfig, PriorModel, tilt, tilt_priors

log = logging.getLogger(__name__)

CSV_HEADER = ["code", "n", "k", "p0", "beta_chan", "beta_dec", "trials", "fail_x", "fail_z", "fail_any",
              "ler", "ci_low", "ci_high", "master_seed"]
ASSUMPTION = "channel law: tilted code-capacity noise, identical marginals for X and Z errors"


@dataclass(frozen=True, eq=False)
class ChannelModel:
    p0: float
    beta_chan: float
    w: np.ndarray
    p_x: np.ndarray
    p_z: np.ndarray


def channel_model(w, p0: float, beta_chan: float) -> ChannelModel:
    if not 0 <= p0 < 0.5:
        raise ValueError(f"p0 must lie in [0, 0.5), got {p0}")
    w = np.asarray(w, dtype=float)
    p, clamped = tilt(w, p0, beta_chan)
    if clamped:
        log.warning("channel probabilities clamped; mean differs from p0")
    return ChannelModel(float(p0), float(beta_chan), w, p, p.copy())


@dataclass(frozen=True)
class SimResult:
    trials: int
    fail_x: int
    fail_z: int
    fail_any: int
    ler: float
    ci_low: float
    ci_high: float
    seed: int
    config_digest: str


def wilson_interval(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(failures, trials).proportion_ci(confidence_level=level, method="wilson")
    rate = failures / trials
    return float(max(0.0, min(ci.low, rate))), float(min(1.0, max(ci.high, rate)))


def sample_error(p, rng: np.random.Generator) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return (rng.random(p.size) < p).astype(np.uint8)


def is_logical_failure(code: CssCode, side: str, e, estimate, reducer: Optional[gf2.RowspaceReducer] = None) -> bool:
    """True when ``e ^ estimate`` is not a stabilizer of the given side."""
    h = code.check_matrix(side)
    e = gf2.as_bits(e, code.n)
    estimate = gf2.as_bits(estimate, code.n)
    if not np.array_equal(h.matvec(e), h.matvec(estimate)):
        raise RuntimeError("estimate does not reproduce the error syndrome")
    reducer = reducer or gf2.RowspaceReducer(code.stabilizer_matrix(side))
    return not reducer.contains(e ^ estimate)


def trial_seed(master_seed: int, index: int) -> int:
    """Counter-based 64-bit seed for trial ``index``, independent of scheduling."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


class TrialRunner:
    """Per-worker state: decoders with their message buffers and rowspace reducers."""

    def __init__(self, code: CssCode, channel: ChannelModel, prior_x: Optional[PriorModel],
                 prior_z: Optional[PriorModel], cfg: DecoderConfig):
        self.code = code
        self.channel = channel
        self.sides = []
        for side, p, prior in (("X", channel.p_x, prior_x), ("Z", channel.p_z, prior_z)):
            h = code.check_matrix(side)
            dec = BpOsdDecoder(h, prior, cfg) if prior is not None else None
            red = gf2.RowspaceReducer(code.stabilizer_matrix(side))
            self.sides.append((h, p, dec, red))

    def run(self, seed: int) -> tuple[bool, bool]:
        rng = np.random.default_rng(seed)
        fails = []
        for h, p, dec, red in self.sides:
            e = sample_error(p, rng)
            if not e.any():
                fails.append(False)
                continue
            s = h.matvec(e)
            out = dec.decode(s)
            if not np.array_equal(h.matvec(out.estimate), s):
                raise RuntimeError("decoder returned an estimate with the wrong syndrome")
            fails.append(not red.contains(e ^ out.estimate))
        return fails[0], fails[1]


def decoder_priors(channel: ChannelModel, beta_dec: float, n: int) -> tuple[Optional[PriorModel], Optional[PriorModel]]:
    if channel.p0 == 0:
        return None, None
    prior = tilt_priors(channel.w, channel.p0, beta_dec, n)
    return prior, prior


def decoder_config(cfg: DecoderConfig, w, beta_dec: float) -> DecoderConfig:
    """Tie-break weights scale with ``beta_dec``; the isotropic decoder gets none."""
    return replace(cfg, w=None if beta_dec == 0 else beta_dec * np.asarray(w, dtype=float))


def run_trial(code: CssCode, channel: ChannelModel, prior_x: Optional[PriorModel], prior_z: Optional[PriorModel],
              cfg: DecoderConfig, seed: int) -> tuple[bool, bool]:
    return TrialRunner(code, channel, prior_x, prior_z, cfg).run(seed)


def _run_block(args) -> tuple[int, int, int]:
    code, channel, beta_dec, cfg, master_seed, start, stop = args
    px, pz = decoder_priors(channel, beta_dec, code.n)
    runner = TrialRunner(code, channel, px, pz, decoder_config(cfg, channel.w, beta_dec))
    fx = fz = fa = 0
    for i in range(start, stop):
        a, b = runner.run(trial_seed(master_seed, i))
        fx += a
        fz += b
        fa += a or b
    return fx, fz, fa


def config_digest(code: CssCode, channel: ChannelModel, beta_dec: float, cfg: DecoderConfig,
                  trials: int, master_seed: int) -> str:
    h = hashlib.sha256()
    h.update(code.h_x.words.tobytes())
    h.update(code.h_z.words.tobytes())
    h.update(np.asarray(channel.w, dtype="<f8").tobytes())
    h.update(json.dumps({
        "code": code.name, "p0": channel.p0, "beta_chan": channel.beta_chan, "beta_dec": beta_dec,
        "bp_iters": cfg.bp_iters, "ms_scale": cfg.ms_scale, "osd_order": cfg.osd_order,
        "rank_rule": cfg.rank_rule, "trials": trials, "master_seed": master_seed,
    }, sort_keys=True).encode())
    return h.hexdigest()[:16]


def monte_carlo(code: CssCode, channel: ChannelModel, decoder_beta: float, cfg: DecoderConfig,
                trials: int, master_seed: int, workers: int = 1, block: int = 500) -> SimResult:
    """Aggregate ``trials`` independent trials; the result does not depend on ``workers``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    blocks = [(code, channel, decoder_beta, cfg, master_seed, a, min(a + block, trials))
              for a in range(0, trials, block)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, blocks))
    else:
        parts = [_run_block(b) for b in blocks]
    fx = sum(p[0] for p in parts)
    fz = sum(p[1] for p in parts)
    fa = sum(p[2] for p in parts)
    lo, hi = wilson_interval(fa, trials)
    return SimResult(trials, fx, fz, fa, fa / trials, lo, hi, int(master_seed),
                     config_digest(code, channel, decoder_beta, cfg, trials, master_seed))


@dataclass(frozen=True)
class GridPoint:
    p0: float
    beta_chan: float
    beta_dec: float


def _fmt(x: float) -> str:
    return repr(float(x))


def csv_row(code: CssCode, pt: GridPoint, res: SimResult) -> list[str]:
    return [code.name, str(code.n), str(code.k), _fmt(pt.p0), _fmt(pt.beta_chan), _fmt(pt.beta_dec),
            str(res.trials), str(res.fail_x), str(res.fail_z), str(res.fail_any),
            _fmt(res.ler), _fmt(res.ci_low), _fmt(res.ci_high), str(res.seed)]


def sweep(code: CssCode, grid: Sequence[GridPoint], w, cfg: DecoderConfig, trials: int, seed: int,
          out_path=None, workers: int = 1, progress: bool = False,
          stream=None) -> list[tuple[GridPoint, SimResult]]:
    """Run ``monte_carlo`` at every grid point (same master seed) and write one CSV row each."""
    if not grid:
        raise ValueError("empty grid")
    rows = []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i, pt in enumerate(grid):
        channel = channel_model(w, pt.p0, pt.beta_chan)
        res = monte_carlo(code, channel, pt.beta_dec, cfg, trials, seed, workers)
        rows.append((pt, res))
        writer.writerow(csv_row(code, pt, res))
        if progress:
            print(f"[{i + 1}/{len(grid)}] p0={pt.p0:g} beta_chan={pt.beta_chan:g} beta_dec={pt.beta_dec:g} "
                  f"ler={res.ler:.3e} ({res.fail_any}/{res.trials})", file=sys.stderr)
    text = buf.getvalue()
    if out_path is None or str(out_path) == "-":
        (stream or sys.stdout).write(text)
        print(f"# {ASSUMPTION}", file=sys.stderr)
    else:
        Path(out_path).write_text(text)
        Path(str(out_path) + ".json").write_text(json.dumps(sidecar(code, grid, cfg, trials, seed, rows), indent=2))
    return rows


def sidecar(code: CssCode, grid: Sequence[GridPoint], cfg: DecoderConfig, trials: int, seed: int,
            rows: Sequence[tuple[GridPoint, SimResult]]) -> dict:
    """Provenance record written next to a CSV file."""
    return {
        "assumption": ASSUMPTION,
        "code": code.name, "n": code.n, "k": code.k,
        "decoder": {"bp_iters": cfg.bp_iters, "ms_scale": cfg.ms_scale, "osd_order": cfg.osd_order,
                    "rank_rule": cfg.rank_rule},
        "trials": trials, "master_seed": seed,
        "points": [{"p0": pt.p0, "beta_chan": pt.beta_chan, "beta_dec": pt.beta_dec,
                    "config_digest": res.config_digest} for pt, res in rows],
    }
