"""End-to-end preprocessing and coding pipeline with RD measurement.

The flow per frame: build a variance-driven block map, filter the luma
plane until its PSNR against the unfiltered input clears a threshold
(derived, when not given, as the highest single-pass PSNR over the whole
sequence), decide per block whether the residual is worth coding (a
trained network, or an exact RD oracle, or fixed policies), and code every
plane with the intra block codec.  The harness sweeps the qp ladder and
emits rate-distortion points as CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .blocks import MAX_VARIANCE, BlockMap, block_variance, build_block_map, edge_energy
from .bitstream import BitReader, BitWriter
from .codec import (
    QuantParams,
    decode_block,
    encode_block,
    encode_frame,
    pack_sequence_header,
    read_plane,
)
from .denoise import FilterParams, denoise_frame
from .errors import EmptySequence, IoFailure
from .frames import VideoSequence, psnr
from .network import Network, create_network, gate, save_network, train

# Returned when every frame filters to an infinite PSNR (identity filter).
THRESHOLD_PSNR_CAP = 60.0

GATE_POLICIES = ("model", "open", "closed", "oracle")

_SIZE_INDEX = {8: 0.0, 16: 1.0 / 3.0, 32: 2.0 / 3.0, 64: 1.0}


@dataclass
class PipelineConfig:
    filter: FilterParams
    quant: QuantParams
    thresholds: tuple[float, float, float] = (50.0, 300.0, 1200.0)
    gate_model: Network | None = None
    threshold_psnr: float | None = None   # None = derive from the sequence
    lambda_rd: float | None = None        # None = 0.85 * step^2
    seed: int = 0

    def resolved_lambda(self) -> float:
        if self.lambda_rd is not None:
            return self.lambda_rd
        return 0.85 * self.quant.step ** 2


@dataclass(frozen=True)
class RdPoint:
    qp: int
    bits: int
    kbps: float
    psnr_y: float
    psnr_u: float
    psnr_v: float


def compute_threshold_psnr(seq: VideoSequence, params: FilterParams) -> float:
    """Highest finite filtered-vs-input PSNR over all frames.

    One denoising pass per frame; infinite values (identity filtering) are
    excluded, and if every frame is infinite the 60 dB cap is returned.
    """
    if not seq.frames:
        raise EmptySequence("cannot derive a threshold from zero frames")
    best = None
    for index in range(len(seq.frames)):
        filtered = denoise_frame(seq.frames, index, params)
        value = psnr(filtered, seq.frames[index])
        if math.isfinite(value) and (best is None or value > best):
            best = value
    return best if best is not None else THRESHOLD_PSNR_CAP


def filter_until_threshold(frames, index: int, threshold: float,
                           params: FilterParams):
    """Re-filter until PSNR against the original input clears the threshold.

    The first pass uses the temporal window; later passes re-filter the
    previous estimate on its own with sigma halved each time (full-strength
    repeats would drift away from the input and never converge).  The loop
    is bounded by max_pipeline_iters; hitting the bound is not an error.

    Returns (estimate, iterations used).
    """
    original = frames[index]
    sigma = params.sigma
    estimate = None
    for iteration in range(1, params.max_pipeline_iters + 1):
        if iteration == 1:
            estimate = denoise_frame(frames, index, params)
        else:
            estimate = denoise_frame([estimate], 0, replace(params, sigma=sigma))
        if psnr(estimate, original) >= threshold:
            return estimate, iteration
        if params.sigma_decay:
            sigma = sigma / 2.0
    return estimate, params.max_pipeline_iters


def gate_features(plane: np.ndarray, x: int, y: int, size: int) -> np.ndarray:
    """Per-block gate inputs, all normalized into [0, 1].

    Order: variance, edge energy, mean absolute level, block-size index
    (8/16/32/64 mapped to 0, 1/3, 2/3, 1).
    """
    region = np.asarray(plane[y:y + size, x:x + size], np.float64)
    return np.array([
        min(block_variance(region) / MAX_VARIANCE, 1.0),
        min(edge_energy(region) / 255.0, 1.0),
        min(float(np.abs(region).mean()) / 255.0, 1.0),
        _SIZE_INDEX[size],
    ])


def oracle_gate_label(samples: np.ndarray, q: QuantParams,
                      lambda_rd: float) -> bool:
    """Exact RD decision: code the block iff J_code < J_skip.

    J = distortion + lambda * bits, with the gate flag bit counted on both
    sides and a skipped block reconstructing to zero.  Ties prefer the
    cheaper skip.
    """
    samples = np.asarray(samples, np.float64)
    writer = BitWriter()
    encode_block(samples, q, True, writer)
    bits_code = writer.bit_count
    writer.align()
    recon = decode_block(BitReader(writer.getvalue()), q, samples.shape[0])
    d_code = float(np.sum((recon.astype(np.float64) - samples) ** 2))
    d_skip = float(np.sum(samples * samples))
    j_code = d_code + lambda_rd * bits_code
    j_skip = d_skip + lambda_rd * 1.0
    return j_code < j_skip


def _resolve_threshold(seq: VideoSequence, config: PipelineConfig) -> float:
    if config.threshold_psnr is not None:
        return config.threshold_psnr
    return compute_threshold_psnr(seq, config.filter)


def _gate_decisions(plane: np.ndarray, block_map: BlockMap, policy: str,
                    model: Network | None, q: QuantParams,
                    lambda_rd: float) -> list[bool]:
    if policy == "open" or (policy == "model" and model is None):
        return [True] * len(block_map.blocks)
    if policy == "closed":
        return [False] * len(block_map.blocks)
    source = np.asarray(plane, np.float64)
    decisions = []
    for block in block_map.blocks:
        x, y = block.origin
        if policy == "oracle":
            region = source[y:y + block.size, x:x + block.size]
            decisions.append(oracle_gate_label(region, q, lambda_rd))
        else:
            decisions.append(gate(model, gate_features(source, x, y, block.size)))
    return decisions


def train_gate(seq: VideoSequence, config: PipelineConfig,
               model_path=None) -> Network:
    """Train the code/skip gate on the filtered sequence.

    Features come from each block of the block map; targets are the exact
    RD oracle labels at the configured qp.  The network is a fixed 4-8-1
    shape trained online (eta 0.5, up to 5000 epochs, MSE goal 0.02) from
    the config seed, and is saved to model_path when given.
    """
    if not seq.frames:
        raise EmptySequence("cannot train a gate on zero frames")
    lam = config.resolved_lambda()
    threshold = _resolve_threshold(seq, config)
    pairs = []
    for index, frame in enumerate(seq.frames):
        block_map = build_block_map(frame, config.thresholds)
        filtered, _ = filter_until_threshold(seq.frames, index, threshold,
                                             config.filter)
        plane = filtered.astype(np.float64)
        for block in block_map.blocks:
            x, y = block.origin
            label = oracle_gate_label(plane[y:y + block.size, x:x + block.size],
                                      config.quant, lam)
            pairs.append((gate_features(plane, x, y, block.size),
                          np.array([1.0 if label else 0.0])))
    net = create_network(4, 8, 1, eta=0.5, seed=config.seed)
    train(net, pairs, max_epochs=5000, error_goal=0.02)
    if model_path is not None:
        save_network(net, model_path)
    return net


def _pooled_psnr(sse: float, samples: int) -> float:
    if samples == 0 or sse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 * samples / sse)


def _sse(a: np.ndarray, b: np.ndarray) -> float:
    diff = a.astype(np.int64) - b.astype(np.int64)
    return float(np.sum(diff * diff))


def encode_sequence(seq: VideoSequence, config: PipelineConfig,
                    gate_policy: str = "model"):
    """Filter, gate, and code a whole sequence.

    Returns (cfbp bytes, RdPoint, report).  The RdPoint PSNR measures the
    reconstruction against the filtered planes the codec actually saw; the
    report additionally carries PSNR against the raw input.
    """
    if not seq.frames:
        raise EmptySequence("no frames to encode")
    if gate_policy not in GATE_POLICIES:
        raise ValueError(f"gate_policy must be one of {GATE_POLICIES}")
    lam = config.resolved_lambda()
    threshold = _resolve_threshold(seq, config)

    chunks = [pack_sequence_header(len(seq.frames), seq.frame_rate,
                                   seq.has_chroma)]
    total_bits = 8 * len(chunks[0])
    sse_coded = {"y": 0.0, "u": 0.0, "v": 0.0}
    sse_input = {"y": 0.0, "u": 0.0, "v": 0.0}
    samples = {"y": 0, "u": 0, "v": 0}
    gates_open = 0
    gates_total = 0
    per_frame = []

    for index, frame in enumerate(seq.frames):
        filtered, iterations = filter_until_threshold(
            seq.frames, index, threshold, config.filter)
        planes = [("y", frame, filtered)]
        if seq.has_chroma:
            u, v = seq.chroma[index]
            planes += [("u", u, u), ("v", v, v)]

        frame_bits = 0
        frame_open = 0
        frame_total = 0
        frame_recon = {}
        for name, raw, coded_plane in planes:
            block_map = build_block_map(raw, config.thresholds)
            decisions = _gate_decisions(coded_plane, block_map, gate_policy,
                                        config.gate_model, config.quant, lam)
            stream = encode_frame(coded_plane, block_map, config.quant,
                                  decisions)
            recon = read_plane(BitReader(stream.data))
            chunks.append(stream.data)
            frame_bits += stream.bit_count
            frame_open += sum(decisions)
            frame_total += len(decisions)
            sse_coded[name] += _sse(recon, coded_plane)
            sse_input[name] += _sse(recon, raw)
            samples[name] += recon.size
            frame_recon[name] = recon

        total_bits += frame_bits
        gates_open += frame_open
        gates_total += frame_total
        per_frame.append({
            "index": index,
            "iterations": iterations,
            "psnr_filtered_vs_input": psnr(filtered, frame),
            "psnr_recon_vs_filtered": psnr(frame_recon["y"], filtered),
            "bits": frame_bits,
            "gates_open": frame_open,
            "gates_total": frame_total,
        })

    fps = float(seq.frame_rate)
    kbps = total_bits * fps / len(seq.frames) / 1000.0
    rd = RdPoint(
        qp=config.quant.qp,
        bits=total_bits,
        kbps=kbps,
        psnr_y=_pooled_psnr(sse_coded["y"], samples["y"]),
        psnr_u=_pooled_psnr(sse_coded["u"], samples["u"]),
        psnr_v=_pooled_psnr(sse_coded["v"], samples["v"]),
    )
    report = {
        "config": {
            "qp": config.quant.qp,
            "step": config.quant.step,
            "sigma": config.filter.sigma,
            "lambda_3d": config.filter.lambda_3d,
            "variance_thresholds": tuple(config.thresholds),
            "threshold_psnr": threshold,
            "lambda_rd": lam,
            "gate_policy": gate_policy,
            "gate_model": config.gate_model is not None,
            "seed": config.seed,
            "max_pipeline_iters": config.filter.max_pipeline_iters,
            "sigma_decay": config.filter.sigma_decay,
            "match_pass1": config.filter.match_pass1,
            "match_pass2": config.filter.match_pass2,
        },
        "frames": per_frame,
        "totals": {
            "bits": total_bits,
            "bytes": sum(len(c) for c in chunks),
            "kbps": kbps,
            "gates_open": gates_open,
            "gates_total": gates_total,
            "sse_vs_filtered": dict(sse_coded),
            "sse_vs_input": dict(sse_input),
            "psnr_vs_filtered": {
                "y": rd.psnr_y, "u": rd.psnr_u, "v": rd.psnr_v},
            "psnr_vs_input": {
                name: _pooled_psnr(sse_input[name], samples[name])
                for name in ("y", "u", "v")},
        },
    }
    return b"".join(chunks), rd, report


def rd_sweep(seq: VideoSequence, config: PipelineConfig, qps,
             gate_policy: str = "model") -> list[RdPoint]:
    """One encode per qp; lambda_rd follows each qp unless pinned."""
    points = []
    for qp in qps:
        step_config = replace(config, quant=QuantParams(qp))
        _, rd, _ = encode_sequence(seq, step_config, gate_policy=gate_policy)
        points.append(rd)
    return points


def _format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


RD_CSV_HEADER = "qp,bits,kbps,psnr_y,psnr_u,psnr_v"


def emit_rd_csv(points, path) -> None:
    """Write RD points as CSV, sorted by qp ascending, PSNR to 4 decimals."""
    if not points:
        raise ValueError("no rd points to write")
    lines = [RD_CSV_HEADER]
    for p in sorted(points, key=lambda p: p.qp):
        lines.append(f"{p.qp},{p.bits},{p.kbps:.4f},"
                     f"{_format_db(p.psnr_y)},{_format_db(p.psnr_u)},"
                     f"{_format_db(p.psnr_v)}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_rd_csv(path) -> list[RdPoint]:
    """Parse a CSV produced by emit_rd_csv back into RD points."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0] != RD_CSV_HEADER:
        raise IoFailure(f"{path} is not an RD CSV")
    points = []
    for line in lines[1:]:
        qp, bits, kbps, py, pu, pv = line.split(",")
        points.append(RdPoint(qp=int(qp), bits=int(bits), kbps=float(kbps),
                              psnr_y=float(py), psnr_u=float(pu),
                              psnr_v=float(pv)))
    return points


def format_report(report: dict) -> str:
    """Deterministic human-readable rendering of an encode report."""
    cfg = report["config"]
    totals = report["totals"]
    lines = ["encode report", "=============", ""]
    for key in ("qp", "step", "sigma", "lambda_3d", "variance_thresholds",
                "threshold_psnr", "lambda_rd", "gate_policy", "gate_model",
                "seed", "max_pipeline_iters", "sigma_decay", "match_pass1",
                "match_pass2"):
        lines.append(f"{key}: {cfg[key]}")
    lines.append("")
    lines.append("frame  iters  bits      gates      psnr(filtered vs input)")
    for fr in report["frames"]:
        lines.append(
            f"{fr['index']:>5}  {fr['iterations']:>5}  {fr['bits']:<8}  "
            f"{fr['gates_open']}/{fr['gates_total']:<8} "
            f"{_format_db(fr['psnr_filtered_vs_input'])}")
    lines.append("")
    lines.append(f"total bits: {totals['bits']} (pre-padding), "
                 f"{totals['bytes']} bytes on disk")
    lines.append(f"kbps: {totals['kbps']:.4f}")
    lines.append(f"gates open: {totals['gates_open']}/{totals['gates_total']}")
    for label, key in (("psnr vs filtered", "psnr_vs_filtered"),
                       ("psnr vs input", "psnr_vs_input")):
        values = totals[key]
        lines.append(f"{label}: Y {_format_db(values['y'])}  "
                     f"U {_format_db(values['u'])}  V {_format_db(values['v'])}")
    return "\n".join(lines) + "\n"
