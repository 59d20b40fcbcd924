"""Command-line entry point.

Subcommands: denoise, train, encode, decode, rd, psnr.  Exit codes: 0 on
success, 1 on usage errors, 2 on data errors.  Diagnostics go to stderr;
data goes to files or stdout.  Every run is deterministic for a fixed
--seed (the CAFBP_SEED environment variable is the fallback).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .blocks import MatchParams
from .codec import QuantParams, decode_sequence
from .denoise import FilterParams, denoise_frame
from .errors import CafbpError
from .frames import VideoSequence, parse_raw_yuv, parse_y4m, write_y4m
from .network import load_network
from .pipeline import (
    PipelineConfig,
    emit_rd_csv,
    encode_sequence,
    format_report,
    rd_sweep,
    train_gate,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this tool reserves 2 for data errors.
    def error(self, message):
        raise _UsageError(message)


def _env_seed() -> int:
    raw = os.environ.get("CAFBP_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"CAFBP_SEED must be an integer, got {raw!r}") from None


def _add_input_flags(parser):
    parser.add_argument("--width", type=int, default=None,
                        help="raw YUV width (input is parsed as Y4M when omitted)")
    parser.add_argument("--height", type=int, default=None,
                        help="raw YUV height")
    parser.add_argument("--chroma", choices=("mono", "420"), default="mono",
                        help="raw YUV chroma mode")


def _add_filter_flags(parser):
    parser.add_argument("--sigma", type=float, default=0.0,
                        help="assumed noise standard deviation")
    parser.add_argument("--lambda3d", type=float, default=2.7,
                        help="hard-threshold multiplier")
    parser.add_argument("--search-radius", type=int, default=12,
                        help="block-matching search radius in pixels")
    parser.add_argument("--group-size", type=int, default=16,
                        help="maximum blocks per group (power of two)")
    parser.add_argument("--match-threshold", type=float, default=2500.0,
                        help="pass-1 per-pixel matching threshold")
    parser.add_argument("--match-threshold-wiener", type=float, default=400.0,
                        help="pass-2 per-pixel matching threshold")
    parser.add_argument("--temporal-depth", type=int, default=1,
                        help="neighbor frames searched on each side")
    parser.add_argument("--step", type=int, default=4,
                        help="reference-block stride")
    parser.add_argument("--tau-edge", type=float, default=30.0,
                        help="edge energy above which matching tightens")
    parser.add_argument("--no-edge-adapt", action="store_true",
                        help="disable edge-adaptive match tightening")
    parser.add_argument("--max-pipeline-iters", type=int, default=4,
                        help="bound on the re-filtering loop")
    parser.add_argument("--no-sigma-decay", action="store_true",
                        help="re-filter at full sigma instead of halving")


def _add_pipeline_flags(parser):
    parser.add_argument("--block-thresholds", default="50,300,1200",
                        help="variance cutoffs T1,T2,T3 for block sizing")
    parser.add_argument("--threshold-psnr", default="auto",
                        help="dB floor the filtered frame must reach, or 'auto'")
    parser.add_argument("--lambda-rd", type=float, default=None,
                        help="RD multiplier for gate labels (default 0.85*step^2)")
    parser.add_argument("--seed", type=int, default=None,
                        help="deterministic seed (falls back to CAFBP_SEED)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads; results are identical for any value")


def _build_parser() -> _Parser:
    parser = _Parser(prog="cafbp", description=__doc__,
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="filter a video (y4m in, y4m out)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_input_flags(p)
    _add_filter_flags(p)
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("train", help="train a gate model from a sequence",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_input_flags(p)
    _add_filter_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--qp", type=int, default=32, help="quantization parameter")
    p.add_argument("input")
    p.add_argument("model", help="output model file (JSON)")

    p = sub.add_parser("encode", help="filter, gate and code a sequence",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_input_flags(p)
    _add_filter_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--qp", type=int, default=32, help="quantization parameter")
    p.add_argument("--gate-model", default=None,
                   help="trained gate model file; omit to code every block")
    p.add_argument("--gate-policy", choices=("model", "open", "closed", "oracle"),
                   default="model", help="per-block gating policy")
    p.add_argument("--report", default=None,
                   help="write the report here instead of stdout")
    p.add_argument("input")
    p.add_argument("output", help="coded .cfbp file")

    p = sub.add_parser("decode", help="decode a .cfbp file back to y4m",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("rd", help="sweep qp values and emit an RD CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_input_flags(p)
    _add_filter_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--qps", default="22,26,30,34,38",
                   help="comma-separated qp ladder")
    p.add_argument("--gate-model", default=None)
    p.add_argument("--gate-policy", choices=("model", "open", "closed", "oracle"),
                   default="model")
    p.add_argument("input")
    p.add_argument("output", help="CSV file")

    p = sub.add_parser("psnr", help="luma PSNR between two videos",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_input_flags(p)
    p.add_argument("a")
    p.add_argument("b")

    return parser


def _read_sequence(path, args):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CafbpError(f"cannot read {path}: {exc}") from exc
    if args.width is not None or args.height is not None:
        if args.width is None or args.height is None:
            raise _UsageError("raw input needs both --width and --height")
        return parse_raw_yuv(data, args.width, args.height, args.chroma)
    return parse_y4m(data)


def _write_file(path, data: bytes):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CafbpError(f"cannot write {path}: {exc}") from exc


def _filter_params(args) -> FilterParams:
    tau = None if args.no_edge_adapt else args.tau_edge
    base = dict(search_radius=args.search_radius,
                max_group_size=args.group_size,
                temporal_depth=args.temporal_depth,
                step=args.step, tau_edge=tau)
    try:
        return FilterParams(
            sigma=args.sigma,
            lambda_3d=args.lambda3d,
            match_pass1=MatchParams(match_threshold=args.match_threshold, **base),
            match_pass2=MatchParams(match_threshold=args.match_threshold_wiener,
                                    **base),
            max_pipeline_iters=args.max_pipeline_iters,
            sigma_decay=not args.no_sigma_decay,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _pipeline_config(args) -> PipelineConfig:
    try:
        thresholds = tuple(float(t) for t in args.block_thresholds.split(","))
    except ValueError:
        raise _UsageError(
            f"--block-thresholds needs three numbers, got {args.block_thresholds!r}"
        ) from None
    if len(thresholds) != 3:
        raise _UsageError("--block-thresholds needs exactly T1,T2,T3")
    if args.threshold_psnr == "auto":
        threshold_psnr = None
    else:
        try:
            threshold_psnr = float(args.threshold_psnr)
        except ValueError:
            raise _UsageError(
                f"--threshold-psnr must be a number or 'auto', "
                f"got {args.threshold_psnr!r}") from None
    try:
        # rd has no --qp; its sweep replaces the quantizer per ladder entry.
        quant = QuantParams(getattr(args, "qp", 32))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    seed = args.seed if args.seed is not None else _env_seed()
    gate_model = None
    if getattr(args, "gate_model", None):
        gate_model = load_network(args.gate_model)
    return PipelineConfig(
        filter=_filter_params(args),
        quant=quant,
        thresholds=thresholds,
        gate_model=gate_model,
        threshold_psnr=threshold_psnr,
        lambda_rd=args.lambda_rd,
        seed=seed,
    )


def _cmd_denoise(args) -> int:
    seq = _read_sequence(args.input, args)
    params = _filter_params(args)
    filtered = [denoise_frame(seq.frames, i, params)
                for i in range(len(seq.frames))]
    out = VideoSequence(frames=filtered, frame_rate=seq.frame_rate,
                        chroma=seq.chroma)
    _write_file(args.output, write_y4m(out))
    return 0


def _cmd_train(args) -> int:
    seq = _read_sequence(args.input, args)
    config = _pipeline_config(args)
    train_gate(seq, config, model_path=args.model)
    print(f"wrote gate model to {args.model}", file=sys.stderr)
    return 0


def _cmd_encode(args) -> int:
    seq = _read_sequence(args.input, args)
    config = _pipeline_config(args)
    data, rd, report = encode_sequence(seq, config, gate_policy=args.gate_policy)
    _write_file(args.output, data)
    text = format_report(report)
    if args.report:
        _write_file(args.report, text.encode())
    else:
        sys.stdout.write(text)
    print(f"qp={rd.qp} bits={rd.bits} kbps={rd.kbps:.4f}", file=sys.stderr)
    return 0


def _cmd_decode(args) -> int:
    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CafbpError(f"cannot read {args.input}: {exc}") from exc
    seq = decode_sequence(data)
    _write_file(args.output, write_y4m(seq))
    return 0


def _cmd_rd(args) -> int:
    seq = _read_sequence(args.input, args)
    config = _pipeline_config(args)
    try:
        qps = [int(q) for q in args.qps.split(",")]
    except ValueError:
        raise _UsageError(f"--qps needs integers, got {args.qps!r}") from None
    points = rd_sweep(seq, config, qps, gate_policy=args.gate_policy)
    emit_rd_csv(points, args.output)
    return 0


def _cmd_psnr(args) -> int:
    a = _read_sequence(args.a, args)
    b = _read_sequence(args.b, args)
    if len(a.frames) != len(b.frames):
        raise CafbpError(
            f"frame counts differ: {len(a.frames)} vs {len(b.frames)}")
    total_sse = 0
    total_samples = 0
    for fa, fb in zip(a.frames, b.frames):
        if fa.shape != fb.shape:
            raise CafbpError(f"frame shapes differ: {fa.shape} vs {fb.shape}")
        diff = fa.astype(np.int64) - fb.astype(np.int64)
        total_sse += int(np.sum(diff * diff))
        total_samples += fa.size
    if total_sse == 0:
        print("inf")
    else:
        value = 10.0 * math.log10(255.0 ** 2 * total_samples / total_sse)
        print(f"{value:.4f}")
    return 0


_COMMANDS = {
    "denoise": _cmd_denoise,
    "train": _cmd_train,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "rd": _cmd_rd,
    "psnr": _cmd_psnr,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        qp = getattr(args, "qp", None)
        if qp is not None and not 0 <= qp <= 51:
            raise _UsageError(f"--qp must be in [0, 51], got {qp}")
        threads = getattr(args, "threads", 1)
        if threads is not None and threads < 1:
            raise _UsageError("--threads must be >= 1")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CafbpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
