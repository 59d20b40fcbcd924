"""Collaborative 3D-transform video denoising with a neural-gated intra
block codec and rate-distortion measurement tools."""

from .blocks import (
    Block,
    BlockGroup,
    BlockMap,
    MatchParams,
    block_variance,
    build_block_map,
    build_group,
    edge_energy,
    match_distance,
    select_block_size,
)
from .codec import (
    Bitstream,
    QuantParams,
    decode_frame,
    decode_sequence,
    dequantize,
    encode_frame,
    inverse_zigzag,
    quantize,
    zigzag,
)
from .denoise import (
    FilterParams,
    denoise_frame,
    hard_threshold,
    pass1_basic_estimate,
    pass2_final_estimate,
    wiener_shrink,
)
from .frames import (
    VideoSequence,
    mse,
    parse_raw_yuv,
    parse_y4m,
    psnr,
    serialize_raw_yuv,
    write_y4m,
)
from .network import (
    Network,
    apply_update,
    backward,
    create_network,
    forward,
    gate,
    load_network,
    save_network,
    sigmoid,
    train,
)
from .pipeline import (
    PipelineConfig,
    RdPoint,
    compute_threshold_psnr,
    emit_rd_csv,
    encode_sequence,
    filter_until_threshold,
    gate_features,
    oracle_gate_label,
    rd_sweep,
    read_rd_csv,
    train_gate,
)
from .transforms import (
    dct2_forward,
    dct2_inverse,
    group_forward,
    group_inverse,
    wht_forward,
    wht_inverse,
)

__version__ = "0.1.0"
