"""Sweep the quantizer ladder over one frame and print the RD table.

Shows the intra block codec end to end: variance-driven block map, DCT,
uniform quantization, zigzag run-length coding, and the bit-exact decode.
"""

import pathlib

import numpy as np

from cafbp import QuantParams, build_block_map, decode_frame, encode_frame, parse_y4m, psnr

fixture = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "fixture_rd.y4m"
plane = parse_y4m(fixture.read_bytes()).frames[0]

block_map = build_block_map(plane, (50.0, 300.0, 1200.0))
sizes = sorted(set(b.size for b in block_map.blocks))
print(f"block map: {len(block_map.blocks)} blocks, sizes {sizes}")

print(f"{'qp':>4} {'step':>8} {'bits':>7} {'psnr':>8}")
for qp in (4, 22, 26, 30, 34, 38):
    q = QuantParams(qp)
    stream = encode_frame(plane, block_map, q)
    recon = decode_frame(stream)
    print(f"{qp:>4} {q.step:>8.3f} {stream.bit_count:>7} "
          f"{psnr(recon, plane):>8.3f}")

# qp=4 is the unit-step quantizer: reconstruction within one code value.
stream = encode_frame(plane, block_map, QuantParams(4))
worst = np.abs(decode_frame(stream).astype(int) - plane.astype(int)).max()
print(f"qp=4 worst sample error: {worst}")
