"""Minimal dense differentiable kernel: float64, explicit backward passes."""

from .checkpoint import load_params, save_params
from .gradcheck import fd_gradcheck
from .layers import (
    NEG_MASK,
    affine,
    affine_vjp,
    attention_layer,
    attention_layer_vjp,
    embedding_rows_vjp,
    feed_forward_vjp,
    init_attention_params,
    init_ffn_params,
    init_layer_norm_params,
    init_mha_params,
    layer_norm_vjp,
    multihead_attention_vjp,
    relu_vjp,
    scalar_head_vjp,
    sinusoidal_positions,
    softmax_rows,
    softmax_xent,
)
from .optim import OptimState, adam_step
from .tensor import ParamSet, Tensor, as_tensor, check_finite

__all__ = [
    "NEG_MASK",
    "OptimState",
    "ParamSet",
    "Tensor",
    "adam_step",
    "affine",
    "affine_vjp",
    "as_tensor",
    "attention_layer",
    "attention_layer_vjp",
    "check_finite",
    "embedding_rows_vjp",
    "fd_gradcheck",
    "feed_forward_vjp",
    "init_attention_params",
    "init_ffn_params",
    "init_layer_norm_params",
    "init_mha_params",
    "layer_norm_vjp",
    "load_params",
    "multihead_attention_vjp",
    "relu_vjp",
    "save_params",
    "scalar_head_vjp",
    "sinusoidal_positions",
    "softmax_rows",
    "softmax_xent",
]
