"""Training loop with a phase-based alpha schedule and early stopping."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Sequence

import numpy as np
import torch

from .data import Example, collate, make_batches
from .loss import wce_loss_from_logits
from .model import Seq2SeqModel

log = logging.getLogger(__name__)


class TrainConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    """``alpha_schedule`` is a list of ``(fraction of max_epochs, alpha)`` phases."""

    alpha_schedule: list[tuple[float, float]] = field(default_factory=lambda: [(1.0, 1.0)])
    min_epochs: int = 1
    max_epochs: int = 10
    tokens_per_batch: int = 3000
    seed: int = 0
    learning_rate: float = 0.1
    optimizer: str = "sgd"
    patience: int = 5
    validation_metric: str = "bleu"
    clip_norm: float | None = 1.0
    warmup_steps: int = 0
    lr_decay: str = "none"

    def __post_init__(self):
        self.alpha_schedule = [(float(f), float(a)) for f, a in self.alpha_schedule]
        if not self.alpha_schedule:
            raise TrainConfigError("alpha_schedule is empty")
        if any(f <= 0 for f, _ in self.alpha_schedule):
            raise TrainConfigError("phase fractions must be positive")
        if abs(sum(f for f, _ in self.alpha_schedule) - 1.0) > 1e-9:
            raise TrainConfigError("phase fractions must sum to 1")
        if any(a < 1 for _, a in self.alpha_schedule):
            raise TrainConfigError("every alpha must be >= 1")
        if self.min_epochs < 0 or self.max_epochs < 1:
            raise TrainConfigError("epoch counts must be positive")
        if self.min_epochs > self.max_epochs:
            raise TrainConfigError(f"min_epochs ({self.min_epochs}) exceeds max_epochs ({self.max_epochs})")
        if self.tokens_per_batch < 1 or self.learning_rate <= 0 or self.patience < 1:
            raise TrainConfigError("tokens_per_batch, learning_rate and patience must be positive")
        if self.warmup_steps < 0:
            raise TrainConfigError("warmup_steps must be non-negative")
        if self.lr_decay not in ("none", "inverse_sqrt", "linear"):
            raise TrainConfigError(f"unknown lr_decay {self.lr_decay!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise TrainConfigError(f"unknown optimizer {self.optimizer!r}")

    def alpha_for_epoch(self, epoch: int) -> float:
        """Alpha used in 1-based ``epoch``; phase ends are rounded to whole epochs."""
        cum = Fraction(0)
        for frac, alpha in self.alpha_schedule:
            cum += Fraction(str(frac))
            if epoch <= round(cum * self.max_epochs):
                return alpha
        return self.alpha_schedule[-1][1]


def lr_factor(step: int, config: TrainConfig, total: int) -> float:
    """Multiplier on the base learning rate after ``step`` updates."""
    s, w = step + 1, config.warmup_steps
    factor = min(1.0, s / w) if w else 1.0
    if config.lr_decay == "inverse_sqrt" and s > w:
        factor = (max(w, 1) / s) ** 0.5
    elif config.lr_decay == "linear" and s > w:
        factor = max(0.0, (total - s + 1) / max(total - w, 1))
    return factor


@dataclass
class EpochLog:
    epoch: int
    alpha: float
    train_loss: float
    valid_score: float | None = None


def train(model: Seq2SeqModel, examples: Sequence[Example], config: TrainConfig,
          validate: Callable[[Seq2SeqModel], float] | None = None) -> tuple[Seq2SeqModel, list[EpochLog]]:
    """Train in place and return the final model with its per-epoch log.

    ``validate`` returns a higher-is-better score; without it training runs
    for ``max_epochs``. With it, training stops once ``min_epochs`` have
    passed and the score has not improved for ``patience`` epochs.
    """
    if not examples:
        raise TrainConfigError("cannot train on an empty corpus")
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    batches = [collate([examples[i] for i in idx]) for idx in make_batches(examples, config.tokens_per_batch)]
    params = [p for p in model.parameters() if p.requires_grad]
    if config.optimizer == "adam":
        opt = torch.optim.Adam(params, lr=config.learning_rate, betas=(0.9, 0.98))
    else:
        opt = torch.optim.SGD(params, lr=config.learning_rate)
    sched = torch.optim.lr_scheduler.LambdaLR(
        opt, partial(lr_factor, config=config, total=config.max_epochs * len(batches)))

    history: list[EpochLog] = []
    best = -math.inf
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        alpha = config.alpha_for_epoch(epoch)
        model.train()
        total, tokens = 0.0, 0
        for b in rng.permutation(len(batches)):
            batch = batches[b]
            weights = batch.weights(alpha).to(model.embed.weight.dtype)
            logits = model(batch.source, batch.target_in)
            loss = wce_loss_from_logits(logits, batch.target_out, weights)
            n = batch.num_tokens
            opt.zero_grad()
            (loss / n).backward()
            if config.clip_norm:
                torch.nn.utils.clip_grad_norm_(params, config.clip_norm)
            opt.step()
            sched.step()
            total += float(loss.detach())
            tokens += n
        entry = EpochLog(epoch, alpha, total / tokens)
        if validate is not None:
            entry.valid_score = float(validate(model))
        history.append(entry)
        log.info("epoch %d alpha %.2f loss %.4f valid %s", epoch, alpha, entry.train_loss, entry.valid_score)
        if entry.valid_score is not None:
            if entry.valid_score > best:
                best, stale = entry.valid_score, 0
            else:
                stale += 1
            if epoch >= config.min_epochs and stale >= config.patience:
                break
    model.eval()
    return model, history
