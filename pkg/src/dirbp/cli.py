"""Command-line front end: ``dirbp <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 runtime or data error, 3 verify
suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import checks, codes, directional, enumerator, gf2, sim
from .codes import CssCode
from .decoder import RANK_RULES, DecoderConfig

EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

ENUM_HEADER = ["beta", "gamma", "mean_score", "var_score", "tail_t", "tail_count"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _code_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("code")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--toric", type=int, metavar="L", help="built-in toric code of size L (default: 9)")
    src.add_argument("--alist", nargs=2, metavar=("HX", "HZ"), help="alist files for H_X and H_Z")
    g.add_argument("--coords", metavar="PATH", help="qubit coordinates for an alist code, one 'x y' per line")
    return p


def _field_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--field", default="orientation:x",
                   help="orientation:x|orientation:y|strip:COLS:W0|radial:CX,CY|file:PATH (default: %(default)s)")
    return p


def _sim_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("noise and decoder")
    g.add_argument("--p0", type=float, default=5e-3, help="mean physical error rate (default: %(default)s)")
    g.add_argument("--beta-chan", type=float, default=1.0, help="channel tilt strength (default: %(default)s)")
    g.add_argument("--beta-dec", type=float, default=1.0, help="decoder prior tilt strength (default: %(default)s)")
    g.add_argument("--iters", type=int, default=30, help="BP iterations (default: %(default)s)")
    g.add_argument("--ms-scale", type=float, default=0.8, help="min-sum normalization (default: %(default)s)")
    g.add_argument("--osd-order", type=int, default=2, help="OSD order (default: %(default)s)")
    g.add_argument("--rank-rule", choices=RANK_RULES, default="llr-then-directional",
                   help="OSD candidate ranking (default: %(default)s)")
    g.add_argument("--trials", type=int, default=1000, help="trials per grid point (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="master seed (default: %(default)s)")
    g.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker processes (default: available CPUs, %(default)s)")
    g.add_argument("--progress", action="store_true", help="report each grid point on stderr")
    return p


def _out_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout (default: %(default)s)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirbp", description="Directional BP+OSD decoding toolkit for CSS codes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    code_p, field_p, sim_p, out_p = _code_parent(), _field_parent(), _sim_parent(), _out_parent()

    sub.add_parser("code-info", parents=[code_p], help="print code parameters")

    sp = sub.add_parser("sim", parents=[code_p, field_p, sim_p, out_p], help="single Monte Carlo point")
    sp.set_defaults(grid="single")

    sp = sub.add_parser("sweep-p", parents=[code_p, field_p, sim_p, out_p], help="sweep the physical error rate")
    sp.add_argument("--p0-list", type=_float_list, required=True, help="comma-separated p0 values")

    sp = sub.add_parser("sweep-beta", parents=[code_p, field_p, sim_p, out_p], help="sweep the decoder tilt")
    sp.add_argument("--beta-list", type=_float_list, required=True, help="comma-separated decoder beta values")
    sp.add_argument("--matched", action="store_true", help="set the channel beta equal to each decoder beta")

    sp = sub.add_parser("enumerate", parents=[code_p, field_p, out_p], help="directional degeneracy enumerator")
    sp.add_argument("--beta-list", type=_float_list, default=[0.0, 0.5, 1.0, 2.0, 4.0],
                    help="comma-separated beta values (default: 0,0.5,1,2,4)")
    sp.add_argument("--syndrome", default=None, help="syndrome as a 0/1 string (default: all zeros)")
    sp.add_argument("--side", choices=("X", "Z"), default="X", help="error type to enumerate (default: %(default)s)")
    sp.add_argument("--tail-t", type=float, default=0.0, help="class score threshold for tail_count (default: %(default)s)")
    sp.add_argument("--cap", type=int, default=enumerator.CAP, help="exhaustive dimension cap (default: %(default)s)")

    sp = sub.add_parser("verify", help="run the invariant suites")
    sp.add_argument("--seed", type=int, default=2024, help="fixture seed (default: %(default)s)")
    sp.add_argument("--quick", action="store_true", help="reduced case counts")
    return parser


def load_code(args) -> CssCode:
    if args.alist:
        h_x = codes.load_alist(args.alist[0])
        h_z = codes.load_alist(args.alist[1])
        coords = codes.load_coords(args.coords) if args.coords else None
        return codes.new_css(h_x, h_z, coords=coords, name=Path(args.alist[0]).stem)
    if args.coords:
        raise UsageError("--coords only applies to --alist codes")
    return codes.toric(args.toric if args.toric is not None else 9)


def parse_field(text: str, code: CssCode) -> np.ndarray:
    kind, _, rest = text.partition(":")
    try:
        if kind == "orientation":
            return directional.orientation_field(code, rest or "x")
        if kind == "strip":
            cols, _, w0 = rest.rpartition(":")
            favored = {int(c) for c in cols.split(",") if c.strip()}
            return directional.strip_field(code, favored, float(w0))
        if kind == "radial":
            cx, cy = (float(t) for t in rest.split(","))
            return directional.radial_field(code, (cx, cy))
        if kind == "file":
            return directional.load_weights(rest, code.n)
    except ValueError as exc:
        if isinstance(exc, codes.CodeError):
            raise
        raise UsageError(f"bad --field {text!r}: {exc}")
    raise UsageError(f"unknown field kind {kind!r}")


def cmd_code_info(args, out) -> int:
    code = load_code(args)
    ok = not code.h_x.mul_transpose(code.h_z).any()
    lines = [
        f"n: {code.n}",
        f"k: {code.k}",
        f"m_x: {code.h_x.rows}",
        f"m_z: {code.h_z.rows}",
        f"rank_hx: {code.rank_x}",
        f"rank_hz: {code.rank_z}",
        f"commutation: {'ok' if ok else 'violated'}",
    ]
    try:
        dist = codes.distances(code)
        lines += [f"d: {dist.d}", f"d_x: {dist.d_x}", f"d_z: {dist.d_z}", f"d_s: {dist.d_s}"]
    except gf2.CapExceededError:
        lines.append("d: skipped (beyond exhaustive cap)")
    out.write("\n".join(lines) + "\n")
    return 0


def _decoder_cfg(args) -> DecoderConfig:
    return DecoderConfig(bp_iters=args.iters, ms_scale=args.ms_scale, osd_order=args.osd_order,
                         rank_rule=args.rank_rule)


def cmd_sweep(args, out) -> int:
    code = load_code(args)
    w = parse_field(args.field, code)
    if args.command == "sweep-p":
        grid = [sim.GridPoint(p, args.beta_chan, args.beta_dec) for p in args.p0_list]
    elif args.command == "sweep-beta":
        grid = [sim.GridPoint(args.p0, b if args.matched else args.beta_chan, b) for b in args.beta_list]
    else:
        grid = [sim.GridPoint(args.p0, args.beta_chan, args.beta_dec)]
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    logging.getLogger(__name__).info("%s", sim.ASSUMPTION)
    sim.sweep(code, grid, w, _decoder_cfg(args), args.trials, args.seed, out_path=args.out,
              workers=max(1, args.workers), progress=args.progress, stream=out)
    return 0


def _emit(text: str, target: Optional[str], out) -> None:
    if target:
        Path(target).write_text(text)
    else:
        out.write(text)


def cmd_enumerate(args, out) -> int:
    code = load_code(args)
    w = parse_field(args.field, code)
    h = code.check_matrix(args.side)
    if args.syndrome is None:
        s = np.zeros(h.rows, dtype=np.uint8)
    else:
        if len(args.syndrome) != h.rows or set(args.syndrome) - {"0", "1"}:
            raise UsageError(f"--syndrome must be a 0/1 string of length {h.rows}")
        s = np.array([int(ch) for ch in args.syndrome], dtype=np.uint8)
    try:
        table = enumerator.class_score_table(code, s, w, args.side, args.cap)
    except gf2.CapExceededError as exc:
        raise gf2.CapExceededError(f"{exc}; enumerate is exhaustive, use a smaller code (e.g. --toric 3)")
    print(f"{table.scores.size} classes scored", file=sys.stderr)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ENUM_HEADER)
    tail = table.tail_count(args.tail_t)
    for beta in args.beta_list:
        rep = table.enumerator(beta)
        writer.writerow([repr(rep.beta), repr(rep.value), repr(rep.mean_score), repr(rep.var_score),
                         repr(float(args.tail_t)), tail])
    _emit(buf.getvalue(), None if args.out == "-" else args.out, out)
    return 0


def cmd_verify(args, out) -> int:
    ok = checks.run_all(seed=args.seed, scale=0.25 if args.quick else 1.0, echo=lambda s: print(s, file=out))
    print("verify: " + ("all suites passed" if ok else "FAILED"), file=out)
    return 0 if ok else EXIT_VERIFY


COMMANDS = {
    "code-info": cmd_code_info,
    "sim": cmd_sweep,
    "sweep-p": cmd_sweep,
    "sweep-beta": cmd_sweep,
    "enumerate": cmd_enumerate,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"dirbp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"dirbp: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
