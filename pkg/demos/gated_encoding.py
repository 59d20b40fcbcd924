"""End-to-end pipeline: filter, train the code/skip gate, compare policies.

The gate is a small sigmoid network trained against an exact
rate-distortion oracle; blocks it restrains cost one flag bit instead of
a coefficient payload.  This script prints the bits and RD cost J = D + λR
for every gating policy so the trained gate's place in the sandwich
(oracle <= model <= open/closed) is visible.
"""

import pathlib

from cafbp import FilterParams, QuantParams, parse_y4m
from cafbp.pipeline import PipelineConfig, encode_sequence, train_gate

fixture = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "fixture_noisy.y4m"
sequence = parse_y4m(fixture.read_bytes())

base = dict(
    filter=FilterParams(sigma=25.0),
    quant=QuantParams(38),
    threshold_psnr=20.0,   # below every frame's filtered PSNR: one pass each
    seed=7,
)

print("training the gate on oracle labels...")
net = train_gate(sequence, PipelineConfig(**base))
lam = PipelineConfig(**base).resolved_lambda()

print(f"{'policy':>8} {'bits':>8} {'J = D + lambda*R':>18} {'open':>9}")
for policy in ("open", "closed", "oracle", "model"):
    config = PipelineConfig(**base, gate_model=net if policy == "model" else None)
    _, point, report = encode_sequence(sequence, config, gate_policy=policy)
    distortion = report["totals"]["sse_vs_filtered"]["y"]
    cost = distortion + lam * point.bits
    opened = report["totals"]["gates_open"]
    total = report["totals"]["gates_total"]
    print(f"{policy:>8} {point.bits:>8} {cost:>18.0f} {opened:>5}/{total}")
