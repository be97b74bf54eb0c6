"""
Command-line front end: ``subpel {filters,warp,predict,complexity,quantsweep,synth}``.

Data goes to files or stdout, diagnostics to stderr. Every file written is
paired with a ``<name>.manifest.json`` recording the command and parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .complexity import (
    MOTION_DECODING_REFERENCE,
    TABLE2_BLOCK_SIZES,
    TABLE2_TAPS,
    reconcile,
    report,
    table2_grid,
)
from .errors import ConfigurationError, ContractError
from .filter_bank import FilterKind, build_filter_table, default_spec
from .frameio import RawVideoSpec, psnr, read_yuv, synth_bandlimited, write_yuv
from .motion import MotionField, QuantSpec, read_mvf, write_mvf
from .warp import Frame, WarpConfig, predict_bidir, warp_block

DEFAULT_TAPS = 8
DEFAULT_BLOCK = 4
DEFAULT_DELTA = "64"
DEFAULT_DELTAS = "8,16,32,64,128"


def fmt_fraction(value: Fraction) -> str:
    """Exact decimal when the denominator is a power of two, ``p/q`` otherwise."""
    value = Fraction(value)
    if value.denominator & (value.denominator - 1) == 0:
        text = repr(float(value))
        return text[:-2] if text.endswith(".0") else text
    return f"{value.numerator}/{value.denominator}"


def fmt_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"size must be positive, got {text!r}")
    return w, h


def _parse_pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def _parse_deltas(text: str) -> list[int]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("delta list is empty")
    try:
        deltas = [int(t) for t in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"deltas must be integers, got {text!r}") from None
    if any(d < 1 for d in deltas):
        raise argparse.ArgumentTypeError("deltas must be >= 1")
    return deltas


def _kind(args) -> FilterKind | None:
    return None if args.filter is None else FilterKind.parse(args.filter)


def _config(args, delta=None) -> WarpConfig:
    return WarpConfig.build(args.taps, _kind(args), args.delta if delta is None else delta,
                            normalize=not getattr(args, "raw_sinc", False))


def _video_spec(args) -> RawVideoSpec:
    w, h = args.size
    return RawVideoSpec(w, h, args.bitdepth, args.chroma)


def _write_manifest(output: Path, command: str, params: dict, started: float, extra=None) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "elapsed_s": round(time.perf_counter() - started, 6),
        "output": str(output),
    }
    if extra:
        manifest.update(extra)
    path = output.with_name(output.name + ".manifest.json")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    os.replace(tmp, path)


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _load_field(path, frame: Frame, block: int | None) -> MotionField:
    field = read_mvf(path)
    if (field.width, field.height) != (frame.width, frame.height):
        raise ContractError(
            f"{path}: field is {field.width}x{field.height} but frame is {frame.width}x{frame.height}"
        )
    if block is not None and field.block_size != block:
        raise ContractError(f"{path}: field block size is {field.block_size}, --block asked for {block}")
    return field


def cmd_filters(args) -> int:
    started = time.perf_counter()
    spec = default_spec(args.taps, _kind(args), not args.raw_sinc)
    quant = QuantSpec.parse(args.delta)
    if quant.infinite:
        raise ConfigurationError("a filter table needs a finite --delta")
    table = build_filter_table(spec, quant.delta)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "N", "delta", "q", "s", "i", "h_i"])
    for q, filt in enumerate(table.filters):
        for i, h in enumerate(filt.coefficients, start=1):
            writer.writerow([spec.kind.value, spec.taps, table.delta, q,
                             format(filt.fraction, ".17g"), i, format(h, ".17g")])
    if args.out:
        out = Path(args.out)
        _write_text(out, buf.getvalue())
        _write_manifest(out, "filters", _params(args), started)
    else:
        sys.stdout.write(buf.getvalue())
    print(f"{table.coefficient_count} coefficients", file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_warp(args) -> int:
    started = time.perf_counter()
    vspec = _video_spec(args)
    config = _config(args)
    ref = read_yuv(args.ref, vspec, args.frame_index)
    field = _load_field(args.mvf, ref, args.block)
    pred, counter = warp_block(ref, field, config)
    out = Path(args.out)
    write_yuv(pred, RawVideoSpec(vspec.width, vspec.height, vspec.bit_depth, "444"), out)
    per_plane = counter.per_pixel() / ref.channels
    print(f"MAC/pixel per plane-warp: {fmt_fraction(per_plane)}")
    print(f"MAC/pixel total ({ref.channels} planes): {fmt_fraction(counter.per_pixel())}")
    extra = {"mac_per_pixel_plane": fmt_fraction(per_plane), "block_size": field.block_size}
    if args.target:
        target = read_yuv(args.target, vspec, args.target_index)
        q = psnr(pred, target)
        print(f"PSNR vs target: {fmt_db(q.psnr_avg)} dB "
              f"(Y {fmt_db(q.psnr_per_channel[0])}, U {fmt_db(q.psnr_per_channel[1])}, "
              f"V {fmt_db(q.psnr_per_channel[2])})")
        extra["psnr_vs_target"] = q.psnr_avg
    _write_manifest(out, "warp", _params(args), started, extra)
    return 0


def cmd_predict(args) -> int:
    started = time.perf_counter()
    vspec = _video_spec(args)
    config = _config(args)
    ref0 = read_yuv(args.ref0, vspec)
    ref1 = read_yuv(args.ref1, vspec)
    field0 = _load_field(args.mvf0, ref0, args.block)
    field1 = _load_field(args.mvf1, ref1, args.block)
    pred, counter = predict_bidir(ref0, field0, ref1, field1, args.alpha, config)
    print(f"MC MAC/pixel (2 refs x {ref0.channels} planes): {fmt_fraction(counter.per_pixel())}")
    extra = {"mc_mac_per_pixel": fmt_fraction(counter.per_pixel())}
    if args.target:
        q = psnr(pred, read_yuv(args.target, vspec))
        print(f"prediction PSNR vs target: {fmt_db(q.psnr_avg)} dB")
        extra["psnr_vs_target"] = q.psnr_avg
    if args.out:
        out = Path(args.out)
        write_yuv(pred, RawVideoSpec(vspec.width, vspec.height, vspec.bit_depth, "444"), out)
        _write_manifest(out, "predict", _params(args), started, extra)
    return 0


def measure_grid(size: int = 64, fraction: tuple[float, float] = (0.3125, 0.6875)):
    """Instrumented single-channel warps for every Table 2 cell.

    Returns the grid of reports with ``measured`` filled in.
    """
    frame = synth_bandlimited(size, size, 0.5, seed=1)
    grid = []
    for B in TABLE2_BLOCK_SIZES:
        row = []
        for N in TABLE2_TAPS:
            field = MotionField.uniform(size, size, B, 1.0 + fraction[0], -2.0 + fraction[1])
            _, counter = warp_block(frame, field, WarpConfig.build(N, delta="inf"))
            row.append(report(N, B).with_measured(counter.per_pixel()))
        grid.append(row)
    return grid


def cmd_complexity(args) -> int:
    started = time.perf_counter()
    grid = measure_grid() if args.measure else table2_grid()

    lines = ["Motion compensation, MAC per decoded pixel (6 x C_2d-block(N, B))"]
    header = f"{'B':>3} | " + " ".join(f"{'N=' + str(n):>8}" for n in TABLE2_TAPS) + " | motion decoding*"
    lines.append(header)
    lines.append("-" * len(header))
    notes = []
    for row in grid:
        B = row[0].block_size
        cells = []
        for rep in row:
            cell = str(rep.mc_display)
            if rep.needs_rounding:
                cell += "~"
                notes.append(f"~ N={rep.n_taps}, B={B}: exact value {fmt_fraction(rep.mc_total_bframe)}, "
                             f"shown rounded half up")
            cells.append(f"{cell:>8}")
        lines.append(f"{B:>3} | " + " ".join(cells) + f" | {MOTION_DECODING_REFERENCE[B]:>6}")
    lines.extend(notes)
    lines.append("* motion decoding: published Cool-chic decoder figures, reference data only (not computed)")

    ok = True
    if args.measure:
        lines.append("")
        lines.append("Measured vs analytic C_2d-block (64x64 instrumented warps):")
        for row in grid:
            for rep in row:
                match = rep.measured == rep.c2d_block
                ok &= match
                lines.append(f"  N={rep.n_taps:>2} B={rep.block_size}: measured {fmt_fraction(rep.measured)}"
                             f" analytic {fmt_fraction(rep.c2d_block)} -> {'ok' if match else 'MISMATCH'}")
    print("\n".join(lines))

    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["B", "N", "c2d_block", "mc_bframe", "measured"])
        for row in grid:
            for rep in row:
                writer.writerow([rep.block_size, rep.n_taps, fmt_fraction(rep.c2d_block),
                                 fmt_fraction(rep.mc_total_bframe),
                                 "" if rep.measured is None else fmt_fraction(rep.measured)])
        out = Path(args.csv)
        _write_text(out, buf.getvalue())
        _write_manifest(out, "complexity", _params(args), started)
    return 0 if ok else 1


def quantsweep(ref: Frame, field: MotionField, target: Frame | None, taps: int, kind,
               deltas, normalize: bool = True):
    """Rows ``(delta, psnr_vs_target, psnr_vs_unquantized)``; the last row is ``inf``."""
    reference, _ = warp_block(ref, field, WarpConfig.build(taps, kind, "inf", normalize))
    rows = []
    for d in list(deltas) + ["inf"]:
        pred, _ = warp_block(ref, field, WarpConfig.build(taps, kind, d, normalize))
        vs_target = psnr(pred, target).psnr_avg if target is not None else math.nan
        rows.append((str(d), vs_target, psnr(pred, reference).psnr_avg))
    return rows


def cmd_quantsweep(args) -> int:
    started = time.perf_counter()
    vspec = _video_spec(args)
    ref = read_yuv(args.ref, vspec)
    field = _load_field(args.mvf, ref, args.block)
    target = read_yuv(args.target, vspec) if args.target else None
    rows = quantsweep(ref, field, target, args.taps, _kind(args), args.deltas, not args.raw_sinc)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delta", "psnr_vs_target", "psnr_vs_unquantized"])
    for d, vs_target, vs_unq in rows:
        writer.writerow([d, "" if math.isnan(vs_target) else fmt_db(vs_target), fmt_db(vs_unq)])
    if args.csv:
        out = Path(args.csv)
        _write_text(out, buf.getvalue())
        _write_manifest(out, "quantsweep", _params(args), started)
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_synth(args) -> int:
    started = time.perf_counter()
    w, h = args.size
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sx, sy = args.shift
    vspec = RawVideoSpec(w, h, args.bitdepth, "444")
    paths = {}
    for name, shift in (("base", (0.0, 0.0)), ("shifted", (sx, sy))):
        luma = synth_bandlimited(w, h, args.cutoff, args.seed, shift)
        # texture replicated in all three planes so every channel carries signal
        frame = Frame(np.repeat(luma.planes, 3, axis=0), args.bitdepth)
        paths[name] = out_dir / f"{name}.yuv"
        write_yuv(frame, vspec, paths[name])
    # backward warping: pred(c, r) = base(c + dc, r + dr) = base(c - sx, r - sy)
    paths["motion"] = out_dir / "motion.mvf"
    write_mvf(MotionField.uniform(w, h, args.block, -sx, -sy), paths["motion"])
    for p in paths.values():
        _write_manifest(p, "synth", _params(args), started)
        print(p)
    return 0


def _add_filter_args(p, delta=True):
    p.add_argument("--filter", choices=["poly", "sinc"], default=None,
                   help="filter family (default: poly for N<=4, sinc above)")
    p.add_argument("--taps", "-N", type=int, default=DEFAULT_TAPS, help="filter length N (default 8)")
    p.add_argument("--raw-sinc", action="store_true", help="do not renormalize sinc taps to unit DC gain")
    if delta:
        p.add_argument("--delta", default=DEFAULT_DELTA, help="fractional accuracy, integer or 'inf' (default 64)")


def _add_video_args(p):
    p.add_argument("--size", type=_parse_size, required=True, help="frame size WxH")
    p.add_argument("--bitdepth", type=int, choices=[8, 10], default=8)
    p.add_argument("--chroma", choices=["444", "420"], default="444")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subpel", description="Sub-pixel motion compensation toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filters", help="dump a precomputed filter table as CSV")
    _add_filter_args(p)
    p.add_argument("--out", "--csv", dest="out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("warp", help="warp one reference frame with a motion field")
    _add_filter_args(p)
    _add_video_args(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--mvf", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--block", type=int, default=None, help="expected motion block size (checked)")
    p.add_argument("--frame-index", type=int, default=0)
    p.add_argument("--target", help="frame to compare the prediction against")
    p.add_argument("--target-index", type=int, default=0)
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("predict", help="bi-directional prediction from two references")
    _add_filter_args(p)
    _add_video_args(p)
    for name in ("ref0", "mvf0", "ref1", "mvf1"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--alpha", type=float, default=0.5, help="weight of ref0 (default 0.5)")
    p.add_argument("--block", type=int, default=None)
    p.add_argument("--target")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("complexity", help="print the motion compensation complexity grid")
    p.add_argument("--measure", action="store_true", help="reconcile against instrumented warps")
    p.add_argument("--csv", help="also write the grid as CSV")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("quantsweep", help="PSNR as a function of the fractional accuracy")
    _add_filter_args(p, delta=False)
    _add_video_args(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--mvf", required=True)
    p.add_argument("--target")
    p.add_argument("--block", type=int, default=None)
    p.add_argument("--deltas", type=_parse_deltas, default=_parse_deltas(DEFAULT_DELTAS))
    p.add_argument("--csv", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_quantsweep)

    p = sub.add_parser("synth", help="write a synthetic band-limited frame pair and its motion")
    p.add_argument("--size", type=_parse_size, default=(64, 64))
    p.add_argument("--cutoff", type=float, default=0.5, help="bandwidth as a fraction of Nyquist")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=_parse_pair, default=(0.5, 0.25), help="SX,SY in pixels")
    p.add_argument("--block", type=int, default=DEFAULT_BLOCK)
    p.add_argument("--bitdepth", type=int, choices=[8, 10], default=8)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ContractError, OSError) as exc:
        print(f"subpel {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
