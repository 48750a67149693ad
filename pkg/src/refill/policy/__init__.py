from refill.policy.checkpoint import (
    CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
    load_checkpoint,
    save_checkpoint,
)
from refill.policy.gcn import (
    GraphBatch,
    LossSpec,
    LossTerms,
    PolicyOutput,
    PolicyParams,
    PPOBatch,
    SampleGroup,
    backward,
    expected_shapes,
    forward,
    forward_batch,
    masked_entropy,
    masked_log_softmax,
    ppo_loss,
    sample_action,
)
from refill.policy.optimizer import Adam, clip_grad_norm, global_norm

__all__ = [
    "CHECKPOINT_FORMAT",
    "CHECKPOINT_VERSION",
    "Adam",
    "GraphBatch",
    "LossSpec",
    "LossTerms",
    "PPOBatch",
    "PolicyOutput",
    "PolicyParams",
    "SampleGroup",
    "backward",
    "clip_grad_norm",
    "expected_shapes",
    "forward",
    "forward_batch",
    "global_norm",
    "load_checkpoint",
    "masked_entropy",
    "masked_log_softmax",
    "ppo_loss",
    "sample_action",
    "save_checkpoint",
]
