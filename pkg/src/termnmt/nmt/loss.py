"""Weighted cross-entropy: constraint tokens in the reference get weight alpha."""
from __future__ import annotations

import math

import torch
from torch import Tensor

PROB_FLOOR = 1e-12
_LOG_FLOOR = math.log(PROB_FLOOR)


def _gather(logp: Tensor, target_ids: Tensor) -> Tensor:
    return logp.gather(-1, target_ids.long().unsqueeze(-1)).squeeze(-1)


def wce_loss(distributions: Tensor, target_ids: Tensor, weights: Tensor) -> Tensor:
    """``-sum_t w_t * log p_t(target_t)`` over every position of the batch.

    ``distributions`` are probabilities (last axis = vocabulary). Probabilities
    are floored at 1e-12 inside the log, so the loss stays finite.
    """
    if distributions.shape[:-1] != target_ids.shape or target_ids.shape != weights.shape:
        raise ValueError("distributions, target_ids and weights must agree in shape")
    if (weights < 0).any():
        raise ValueError("weights must be non-negative")
    p = _gather(distributions, target_ids)
    return -(weights * torch.log(p.clamp_min(PROB_FLOOR))).sum()


def wce_loss_from_logits(logits: Tensor, target_ids: Tensor, weights: Tensor) -> Tensor:
    """Same objective computed from unnormalised scores via log-softmax."""
    logp = torch.log_softmax(logits, dim=-1)
    return -(weights * _gather(logp, target_ids).clamp_min(_LOG_FLOOR)).sum()


def constraint_weights(constraint_mask: Tensor, padding_mask: Tensor, alpha: float) -> Tensor:
    """alpha on constraint tokens, 1 elsewhere, 0 on padding."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    w = torch.where(constraint_mask, torch.as_tensor(float(alpha)), torch.as_tensor(1.0))
    return w.masked_fill(padding_mask, 0.0)
