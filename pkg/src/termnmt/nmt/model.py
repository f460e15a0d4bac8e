"""A small pre-norm transformer encoder-decoder with one shared embedding table.

The same ``embed.weight`` tensor serves as source embedding, target
embedding and output projection.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from .vocab import PAD_ID


@dataclass
class ModelConfig:
    vocab_size: int
    num_layers: int = 3
    model_dim: int = 64
    ffn_dim: int = 128
    num_heads: int = 4
    dropout_rate: float = 0.1
    max_positions: int = 256

    def __post_init__(self):
        for name in ("vocab_size", "num_layers", "model_dim", "ffn_dim", "num_heads", "max_positions"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.model_dim % self.num_heads:
            raise ValueError("model_dim must be divisible by num_heads")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


def sinusoid_table(length: int, dim: int) -> Tensor:
    pos = torch.arange(length, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64) * (-math.log(10000.0) / dim))
    table = torch.zeros(length, dim, dtype=torch.float64)
    table[:, 0::2] = torch.sin(pos * div)
    table[:, 1::2] = torch.cos(pos * div)[:, : dim // 2]
    return table


class Attention(nn.Module):
    def __init__(self, dim: int, heads: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.q = nn.Linear(dim, dim)
        self.k = nn.Linear(dim, dim)
        self.v = nn.Linear(dim, dim)
        self.o = nn.Linear(dim, dim)
        self.drop = nn.Dropout(dropout)

    def forward(self, query: Tensor, key: Tensor, blocked: Tensor) -> Tensor:
        # blocked: bool, broadcastable to (B, H, Tq, Tk); True = not attendable
        b, tq, d = query.shape
        tk = key.shape[1]
        h = self.heads
        q = self.q(query).view(b, tq, h, d // h).transpose(1, 2)
        k = self.k(key).view(b, tk, h, d // h).transpose(1, 2)
        v = self.v(key).view(b, tk, h, d // h).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(d // h)
        scores = scores.masked_fill(blocked, float("-inf"))
        attn = self.drop(torch.softmax(scores, dim=-1))
        return self.o((attn @ v).transpose(1, 2).reshape(b, tq, d))


class FeedForward(nn.Sequential):
    def __init__(self, dim: int, hidden: int, dropout: float):
        super().__init__(nn.Linear(dim, hidden), nn.ReLU(), nn.Dropout(dropout), nn.Linear(hidden, dim))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.model_dim
        self.norm1, self.norm2 = nn.LayerNorm(d), nn.LayerNorm(d)
        self.attn = Attention(d, cfg.num_heads, cfg.dropout_rate)
        self.ffn = FeedForward(d, cfg.ffn_dim, cfg.dropout_rate)
        self.drop = nn.Dropout(cfg.dropout_rate)

    def forward(self, x: Tensor, blocked: Tensor) -> Tensor:
        y = self.norm1(x)
        x = x + self.drop(self.attn(y, y, blocked))
        return x + self.drop(self.ffn(self.norm2(x)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.model_dim
        self.norm1, self.norm2, self.norm3 = nn.LayerNorm(d), nn.LayerNorm(d), nn.LayerNorm(d)
        self.self_attn = Attention(d, cfg.num_heads, cfg.dropout_rate)
        self.cross_attn = Attention(d, cfg.num_heads, cfg.dropout_rate)
        self.ffn = FeedForward(d, cfg.ffn_dim, cfg.dropout_rate)
        self.drop = nn.Dropout(cfg.dropout_rate)

    def forward(self, x: Tensor, memory: Tensor, self_blocked: Tensor, mem_blocked: Tensor) -> Tensor:
        y = self.norm1(x)
        x = x + self.drop(self.self_attn(y, y, self_blocked))
        x = x + self.drop(self.cross_attn(self.norm2(x), memory, mem_blocked))
        return x + self.drop(self.ffn(self.norm3(x)))


class Seq2SeqModel(nn.Module):
    """Encoder-decoder whose output layer reuses the embedding matrix."""

    def __init__(self, config: ModelConfig, vocab=None):
        super().__init__()
        self.config = config
        self.vocab = vocab
        d = config.model_dim
        self.embed = nn.Embedding(config.vocab_size, d)
        nn.init.normal_(self.embed.weight, mean=0.0, std=d ** -0.5)
        self.register_buffer("positions", sinusoid_table(config.max_positions, d).float(), persistent=False)
        self.encoder = nn.ModuleList(EncoderLayer(config) for _ in range(config.num_layers))
        self.decoder = nn.ModuleList(DecoderLayer(config) for _ in range(config.num_layers))
        self.enc_norm = nn.LayerNorm(d)
        self.dec_norm = nn.LayerNorm(d)
        self.drop = nn.Dropout(config.dropout_rate)

    @property
    def output_weight(self) -> Tensor:
        return self.embed.weight

    def _embed(self, ids: Tensor) -> Tensor:
        if ids.shape[1] > self.config.max_positions:
            raise ValueError(f"sequence length {ids.shape[1]} exceeds max_positions")
        x = self.embed(ids) * math.sqrt(self.config.model_dim)
        x = x + self.positions[: ids.shape[1]].to(x.dtype)
        return self.drop(x)

    def encode(self, src: Tensor) -> tuple[Tensor, Tensor]:
        blocked = (src == PAD_ID)[:, None, None, :]
        x = self._embed(src)
        for layer in self.encoder:
            x = layer(x, blocked)
        return self.enc_norm(x), blocked

    def decode(self, memory: Tensor, mem_blocked: Tensor, tgt_in: Tensor) -> Tensor:
        t = tgt_in.shape[1]
        causal = torch.ones(t, t, dtype=torch.bool, device=tgt_in.device).triu(1)
        self_blocked = causal[None, None] | (tgt_in == PAD_ID)[:, None, None, :]
        x = self._embed(tgt_in)
        for layer in self.decoder:
            x = layer(x, memory, self_blocked, mem_blocked)
        return F.linear(self.dec_norm(x), self.output_weight)

    def forward(self, src: Tensor, tgt_in: Tensor) -> Tensor:
        """Return logits of shape (batch, target length, vocab)."""
        memory, blocked = self.encode(src)
        return self.decode(memory, blocked, tgt_in)

    def check_ids(self, *tensors: Tensor) -> None:
        for ids in tensors:
            if ids.numel() and (int(ids.min()) < 0 or int(ids.max()) >= self.config.vocab_size):
                raise IndexError(f"token id outside [0, {self.config.vocab_size})")


def forward(model: Seq2SeqModel, source_ids, target_prefix_ids) -> Tensor:
    """Next-token distributions for every prefix position.

    Accepts 1-D (single sentence) or 2-D (batch) id arrays; output position
    ``t`` is the distribution of the token following ``target_prefix_ids[:t+1]``.
    """
    src = torch.as_tensor(source_ids, dtype=torch.long)
    tgt = torch.as_tensor(target_prefix_ids, dtype=torch.long)
    single = src.dim() == 1
    if single:
        src, tgt = src[None], tgt[None]
    model.check_ids(src, tgt)
    probs = torch.softmax(model(src, tgt), dim=-1)
    return probs[0] if single else probs
