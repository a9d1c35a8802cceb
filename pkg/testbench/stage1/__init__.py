"""Per-antenna supervised networks trained on derotated one-bit labels."""

from testbench.stage1.mlp import MlpModel, init_mlp, mlp_forward
from testbench.stage1.trainer import (
    Stage1Estimate,
    Stage1Params,
    TrainingSet,
    build_training_set,
    generate_estimate,
    make_label,
    run_stage1,
    train_antenna_net,
)
