"""Differentiable layers with hand-written backward passes.

Every ``*_vjp`` function returns ``(output, backward)`` where ``backward``
takes the gradient of a scalar loss with respect to the output and returns
the gradient with respect to the inputs, accumulating parameter gradients
into the owning :class:`~vlf.kernel.tensor.ParamSet` along the way. There
is no tape: composites chain the closures explicitly.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from .tensor import ParamSet, Tensor, check_finite

# Large finite stand-in for -inf so masked scores never produce NaN.
NEG_MASK = -1e30

ATTENTION_PARAM_NAMES = (
    "ln1.g", "ln1.b", "wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo",
    "ln2.g", "ln2.b", "w1", "b1", "w2", "b2",
)


def sinusoidal_positions(k: int, d: int) -> Tensor:
    """Deterministic sine/cosine position table of shape [k, d]."""
    if k < 1:
        raise ConfigError(f"need at least one position, got k={k}")
    if d % 2 != 0:
        raise ConfigError(f"position dimension must be even, got d={d}")
    pos = np.arange(k, dtype=np.float64)[:, None]
    j = np.arange(d // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * j / d)
    table = np.empty((k, d), dtype=np.float64)
    table[:, 0::2] = np.sin(angle)
    table[:, 1::2] = np.cos(angle)
    return table


def affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b with shape validation."""
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(
            f"affine: cannot multiply x{tuple(x.shape)} by w{tuple(w.shape)}"
        )
    if b.shape != (w.shape[1],):
        raise ShapeError(
            f"affine: bias shape {tuple(b.shape)} does not match output width {w.shape[1]}"
        )
    return check_finite(x @ w + b, "affine output")


def affine_vjp(x: Tensor, w: Tensor, b: Tensor):
    out = affine(x, w, b)

    def backward(g: Tensor):
        return g @ w.T, x.T @ g, g.sum(axis=0)

    return out, backward


def relu_vjp(x: Tensor):
    mask = x > 0.0
    return x * mask, lambda g: g * mask


def layer_norm_vjp(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6):
    mu = x.mean(axis=1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    out = xhat * gamma + beta

    def backward(g: Tensor):
        dgamma = (g * xhat).sum(axis=0)
        dbeta = g.sum(axis=0)
        dxhat = g * gamma
        dx = (
            dxhat
            - dxhat.mean(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        ) * inv
        return dx, dgamma, dbeta

    return out, backward


def softmax_rows(x: Tensor) -> Tensor:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(logits: Tensor, target: int) -> tuple[float, Tensor]:
    """Negative log-likelihood of ``target`` under softmax(logits).

    Returns the loss and its gradient, softmax(logits) - onehot(target).
    """
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    n = logits.shape[0]
    if not 0 <= target < n:
        raise IndexError(f"target {target} outside [0, {n})")
    m = logits.max()
    shifted = logits - m
    lse = m + math.log(np.exp(shifted).sum())
    loss = lse - logits[target]
    grad = softmax_rows(logits[None, :])[0]
    grad[target] -= 1.0
    if not math.isfinite(loss):
        raise NumericError("cross-entropy loss is not finite")
    return float(loss), grad


def multihead_attention_vjp(
    xq: Tensor,
    xkv: Tensor,
    params: ParamSet,
    heads: int,
    prefix: str = "",
    causal: bool = False,
):
    """Scaled dot-product attention; self-attention when xq is xkv.

    Returns ``(out, backward)``; ``backward(g)`` yields ``(dxq, dxkv)`` and
    accumulates gradients for the projection parameters. With ``causal``
    each query position attends only to keys at or before it.
    """
    d = xq.shape[1]
    if d % heads != 0:
        raise ConfigError(f"hidden dim {d} not divisible by {heads} heads")
    dh = d // heads
    kq, kk = xq.shape[0], xkv.shape[0]

    def p(name):
        return params[prefix + name]

    q_flat = xq @ p("wq") + p("bq")
    k_flat = xkv @ p("wk") + p("bk")
    v_flat = xkv @ p("wv") + p("bv")
    # [heads, positions, dh]
    q = q_flat.reshape(kq, heads, dh).transpose(1, 0, 2)
    k = k_flat.reshape(kk, heads, dh).transpose(1, 0, 2)
    v = v_flat.reshape(kk, heads, dh).transpose(1, 0, 2)

    scores = q @ k.transpose(0, 2, 1) / math.sqrt(dh)
    if causal:
        mask = np.triu(np.ones((kq, kk)), k=1) * NEG_MASK
        scores = scores + mask
    attn = softmax_rows(scores)
    ctx = attn @ v
    ctx_flat = ctx.transpose(1, 0, 2).reshape(kq, d)
    out = ctx_flat @ p("wo") + p("bo")

    def backward(g: Tensor):
        params.add_grad(prefix + "wo", ctx_flat.T @ g)
        params.add_grad(prefix + "bo", g.sum(axis=0))
        dctx = (g @ p("wo").T).reshape(kq, heads, dh).transpose(1, 0, 2)
        dattn = dctx @ v.transpose(0, 2, 1)
        dv = attn.transpose(0, 2, 1) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dq = dscores @ k / math.sqrt(dh)
        dk = dscores.transpose(0, 2, 1) @ q / math.sqrt(dh)
        dq_flat = dq.transpose(1, 0, 2).reshape(kq, d)
        dk_flat = dk.transpose(1, 0, 2).reshape(kk, d)
        dv_flat = dv.transpose(1, 0, 2).reshape(kk, d)
        params.add_grad(prefix + "wq", xq.T @ dq_flat)
        params.add_grad(prefix + "bq", dq_flat.sum(axis=0))
        params.add_grad(prefix + "wk", xkv.T @ dk_flat)
        params.add_grad(prefix + "bk", dk_flat.sum(axis=0))
        params.add_grad(prefix + "wv", xkv.T @ dv_flat)
        params.add_grad(prefix + "bv", dv_flat.sum(axis=0))
        dxq = dq_flat @ p("wq").T
        dxkv = dk_flat @ p("wk").T + dv_flat @ p("wv").T
        return dxq, dxkv

    return out, backward


def feed_forward_vjp(x: Tensor, params: ParamSet, prefix: str = ""):
    """Two-layer feed-forward: relu(x @ w1 + b1) @ w2 + b2."""
    h_pre = x @ params[prefix + "w1"] + params[prefix + "b1"]
    h, relu_bwd = relu_vjp(h_pre)
    out = h @ params[prefix + "w2"] + params[prefix + "b2"]

    def backward(g: Tensor):
        params.add_grad(prefix + "w2", h.T @ g)
        params.add_grad(prefix + "b2", g.sum(axis=0))
        dh = relu_bwd(g @ params[prefix + "w2"].T)
        params.add_grad(prefix + "w1", x.T @ dh)
        params.add_grad(prefix + "b1", dh.sum(axis=0))
        return dh @ params[prefix + "w1"].T

    return out, backward


def attention_layer_vjp(x: Tensor, params: ParamSet, heads: int, prefix: str = ""):
    """Pre-norm self-attention sublayer plus feed-forward sublayer.

    Both sublayers carry residual connections, so output shape equals
    input shape and the layer stays permutation-equivariant when no
    positional signal is mixed into ``x``.
    """
    if x.shape[0] < 1:
        raise ConfigError("attention layer needs at least one position")
    n1, ln1_bwd = layer_norm_vjp(x, params[prefix + "ln1.g"], params[prefix + "ln1.b"])
    att, att_bwd = multihead_attention_vjp(n1, n1, params, heads, prefix=prefix)
    x1 = x + att
    n2, ln2_bwd = layer_norm_vjp(x1, params[prefix + "ln2.g"], params[prefix + "ln2.b"])
    ff, ff_bwd = feed_forward_vjp(n2, params, prefix=prefix)
    out = x1 + ff

    def backward(g: Tensor):
        dn2 = ff_bwd(g)
        dx1, dg2, db2 = ln2_bwd(dn2)
        dx1 = dx1 + g
        params.add_grad(prefix + "ln2.g", dg2)
        params.add_grad(prefix + "ln2.b", db2)
        dq, dkv = att_bwd(dx1)
        dn1 = dq + dkv
        dx, dg1, db1 = ln1_bwd(dn1)
        params.add_grad(prefix + "ln1.g", dg1)
        params.add_grad(prefix + "ln1.b", db1)
        return dx + dx1

    return check_finite(out, "attention layer output"), backward


def attention_layer(x: Tensor, params: ParamSet, heads: int, prefix: str = "") -> Tensor:
    out, _ = attention_layer_vjp(x, params, heads, prefix=prefix)
    return out


def init_mha_params(
    params: ParamSet, d: int, heads: int, rng: np.random.Generator, prefix: str = ""
) -> None:
    """Allocate query/key/value/output projections under ``prefix``."""
    if d % heads != 0:
        raise ConfigError(f"hidden dim {d} not divisible by {heads} heads")
    std = 1.0 / math.sqrt(d)
    for name in ("wq", "wk", "wv", "wo"):
        params.add(prefix + name, rng.normal(0.0, std, size=(d, d)))
    for name in ("bq", "bk", "bv", "bo"):
        params.add(prefix + name, np.zeros(d))


def init_ffn_params(
    params: ParamSet, d: int, ff: int, rng: np.random.Generator, prefix: str = ""
) -> None:
    params.add(prefix + "w1", rng.normal(0.0, 1.0 / math.sqrt(d), size=(d, ff)))
    params.add(prefix + "b1", np.zeros(ff))
    params.add(prefix + "w2", rng.normal(0.0, 1.0 / math.sqrt(ff), size=(ff, d)))
    params.add(prefix + "b2", np.zeros(d))


def init_layer_norm_params(params: ParamSet, d: int, prefix: str = "") -> None:
    params.add(prefix + "g", np.ones(d))
    params.add(prefix + "b", np.zeros(d))


def init_attention_params(
    params: ParamSet,
    d: int,
    heads: int,
    rng: np.random.Generator,
    prefix: str = "",
    ff: int | None = None,
) -> None:
    """Allocate one attention layer's parameters under ``prefix``."""
    ff = 2 * d if ff is None else ff
    init_layer_norm_params(params, d, prefix=prefix + "ln1.")
    init_mha_params(params, d, heads, rng, prefix=prefix)
    init_layer_norm_params(params, d, prefix=prefix + "ln2.")
    init_ffn_params(params, d, ff, rng, prefix=prefix)


def embedding_rows_vjp(params: ParamSet, name: str, ids: Sequence[int]):
    """Gather rows ``table[ids]``; backward scatters into the table grad."""
    table = params[name]
    idx = np.asarray(ids, dtype=np.int64)
    rows = table[idx]

    def backward(g: Tensor):
        acc = np.zeros_like(table)
        np.add.at(acc, idx, g)
        params.add_grad(name, acc)

    return rows, backward


def scalar_head_vjp(states: Tensor, params: ParamSet, prefix: str):
    """Per-position scalar logits: states @ w + b."""
    w = params[prefix + "w"]
    b = params[prefix + "b"]
    out = states @ w + b[0]

    def backward(g: Tensor):
        params.add_grad(prefix + "w", states.T @ g)
        params.add_grad(prefix + "b", np.array([g.sum()]))
        return np.outer(g, w)

    return out, backward


Backward = Callable[[Tensor], Tensor]
