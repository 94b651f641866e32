"""Linear-chain CRF over the three segment tags.

A tag sequence scores as the sum of per-position emission scores plus
pairwise transition scores between adjacent tags; there are no separate
start or stop terms. The partition function and marginals run in
log-space for stability.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError, NumericError
from ..kernel import Tensor

TAGS = ("B-Seg", "I-Seg", "O")
TAG_TO_INDEX = {t: i for i, t in enumerate(TAGS)}
N_TAGS = len(TAGS)

TagSequence = list


def tags_to_indices(tags: list[str]) -> list[int]:
    try:
        return [TAG_TO_INDEX[t] for t in tags]
    except KeyError as exc:
        raise IndexError(f"unknown tag {exc.args[0]!r}; expected one of {TAGS}") from exc


def indices_to_tags(indices: list[int]) -> list[str]:
    return [TAGS[i] for i in indices]


def _check_scores(emissions: Tensor, transitions: Tensor) -> None:
    if emissions.ndim != 2 or emissions.shape[1] != N_TAGS:
        raise InputError(f"emissions must be [k x {N_TAGS}], got {emissions.shape}")
    if transitions.shape != (N_TAGS, N_TAGS):
        raise InputError(f"transitions must be {N_TAGS}x{N_TAGS}, got {transitions.shape}")
    if not (np.all(np.isfinite(emissions)) and np.all(np.isfinite(transitions))):
        raise NumericError("CRF scores contain non-finite values")


def crf_score(emissions: Tensor, transitions: Tensor, tags: list[str]) -> float:
    """Path score: transition terms for i >= 2 plus all emission terms."""
    _check_scores(emissions, transitions)
    idx = tags_to_indices(tags)
    k = emissions.shape[0]
    if len(idx) != k:
        raise InputError(f"tag sequence length {len(idx)} != segment count {k}")
    score = sum(emissions[i, idx[i]] for i in range(k))
    score += sum(transitions[idx[i - 1], idx[i]] for i in range(1, k))
    return float(score)


def _logsumexp(x: np.ndarray, axis=None):
    if axis is None:
        m = float(x.max())
        return m + float(np.log(np.exp(x - m).sum()))
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def crf_log_partition(emissions: Tensor, transitions: Tensor) -> float:
    """log sum over all tag sequences of exp(score), by the forward pass."""
    _check_scores(emissions, transitions)
    k = emissions.shape[0]
    if k < 1:
        raise InputError("need at least one position")
    alpha = emissions[0].copy()
    for i in range(1, k):
        alpha = _logsumexp(alpha[:, None] + transitions, axis=0) + emissions[i]
    return float(_logsumexp(alpha))


def _forward_backward(emissions: Tensor, transitions: Tensor):
    k = emissions.shape[0]
    alphas = np.empty((k, N_TAGS))
    alphas[0] = emissions[0]
    for i in range(1, k):
        alphas[i] = _logsumexp(alphas[i - 1][:, None] + transitions, axis=0) + emissions[i]
    betas = np.zeros((k, N_TAGS))
    for i in range(k - 2, -1, -1):
        betas[i] = _logsumexp(
            transitions + emissions[i + 1][None, :] + betas[i + 1][None, :], axis=1
        )
    log_z = float(_logsumexp(alphas[-1]))
    return alphas, betas, log_z


def crf_nll_grad(
    emissions: Tensor, transitions: Tensor, tags: list[str]
) -> tuple[float, Tensor, Tensor]:
    """Negative log-likelihood of ``tags`` with gradients.

    The emission gradient is marginal tag probabilities minus the one-hot
    gold tags; the transition gradient is expected minus observed
    transition counts.
    """
    _check_scores(emissions, transitions)
    idx = tags_to_indices(tags)
    k = emissions.shape[0]
    if len(idx) != k:
        raise InputError(f"tag sequence length {len(idx)} != segment count {k}")

    alphas, betas, log_z = _forward_backward(emissions, transitions)
    loss = log_z - crf_score(emissions, transitions, tags)

    grad_e = np.exp(alphas + betas - log_z)
    for i, t in enumerate(idx):
        grad_e[i, t] -= 1.0

    grad_t = np.zeros((N_TAGS, N_TAGS))
    for i in range(k - 1):
        pair = (
            alphas[i][:, None]
            + transitions
            + emissions[i + 1][None, :]
            + betas[i + 1][None, :]
            - log_z
        )
        grad_t += np.exp(pair)
    for i in range(1, k):
        grad_t[idx[i - 1], idx[i]] -= 1.0

    if not np.isfinite(loss):
        raise NumericError("CRF loss is not finite")
    return float(loss), grad_e, grad_t


def viterbi(emissions: Tensor, transitions: Tensor) -> tuple[list[str], float]:
    """Exact argmax tag sequence and its score.

    Ties resolve to the lowest tag index at the latest differing
    position: the final tag takes the smallest index among maxima, and
    each backpointer does the same.
    """
    _check_scores(emissions, transitions)
    k = emissions.shape[0]
    if k < 1:
        raise InputError("need at least one position")
    delta = emissions[0].copy()
    back = np.zeros((k, N_TAGS), dtype=np.int64)
    for i in range(1, k):
        candidate = delta[:, None] + transitions
        back[i] = np.argmax(candidate, axis=0)
        delta = candidate[back[i], np.arange(N_TAGS)] + emissions[i]
    best_last = int(np.argmax(delta))
    score = float(delta[best_last])
    path = [best_last]
    for i in range(k - 1, 0, -1):
        path.append(int(back[i, path[-1]]))
    path.reverse()
    return indices_to_tags(path), score
