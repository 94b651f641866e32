"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import NumericError
from .tensor import ParamSet

# Above this size a tensor is checked on a random coordinate sample.
FULL_CHECK_LIMIT = 10_000


def fd_gradcheck(
    loss_fn: Callable[[ParamSet], float],
    params: ParamSet,
    eps: float = 1e-5,
    sample_rng: np.random.Generator | None = None,
) -> float:
    """Worst relative error of analytic gradients vs central differences.

    ``loss_fn`` must be deterministic, return a finite scalar, and
    accumulate its gradients into ``params``. Tensors larger than
    ``FULL_CHECK_LIMIT`` elements are probed on a sampled subset of
    coordinates.
    """
    if eps <= 0:
        raise NumericError(f"finite-difference step must be positive, got {eps}")

    def evaluate() -> float:
        loss = float(loss_fn(params))
        if not math.isfinite(loss):
            raise NumericError("loss function returned a non-finite value")
        return loss

    params.zero_grads()
    evaluate()
    analytic = {name: params.grad(name).copy() for name in params.names()}
    params.zero_grads()
    # Coordinates whose true gradient is (near) zero carry only
    # finite-difference noise; measure them against the overall gradient
    # scale instead of against themselves.
    scale = max(
        (float(np.max(np.abs(g))) for g in analytic.values() if g.size), default=0.0
    )
    floor = max(1e-8, 1e-3 * scale)

    worst = 0.0
    for name, value in params.items():
        flat = value.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        n = flat.shape[0]
        if n > FULL_CHECK_LIMIT:
            rng = sample_rng or np.random.default_rng(0)
            coords = rng.choice(n, size=FULL_CHECK_LIMIT, replace=False)
        else:
            coords = range(n)
        for i in coords:
            original = flat[i]
            flat[i] = original + eps
            plus = evaluate()
            flat[i] = original - eps
            minus = evaluate()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            denom = max(abs(grad_flat[i]), abs(numeric), floor)
            worst = max(worst, abs(grad_flat[i] - numeric) / denom)
    params.zero_grads()
    return worst
