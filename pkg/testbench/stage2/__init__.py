"""Deep-image-prior denoiser over the replicated stage-1 estimate."""

from testbench.stage2.dip import (
    ChannelTensor,
    DipConfig,
    DipModel,
    build_tensor,
    dip_fit,
    dip_forward,
    extract_estimate,
    init_dip,
    run_stage2,
)
from testbench.stage2.layers import batch_norm, conv_1x1, upsample_2x_bilinear
