"""Versioned binary checkpoint container.

Layout (all integers little-endian)::

    offset 0   8 bytes   magic b"TNMTCKPT"
    offset 8   uint32    format version (1)
    offset 12  uint32    config length C, then C bytes of UTF-8 JSON (ModelConfig fields)
    ...        uint32    vocabulary length V, then V bytes of UTF-8, units joined by "\\n"
                         (V = 0 when no vocabulary is stored)
    ...        uint32    parameter count P, then P blocks of:
                           uint16 name length N, N bytes UTF-8 name,
                           uint8 ndim, ndim x uint32 dims,
                           prod(dims) x float32 values (row-major)

The tied output projection is not stored separately; it is ``embed.weight``.
"""
from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np
import torch

from .model import ModelConfig, Seq2SeqModel
from .vocab import Vocabulary

MAGIC = b"TNMTCKPT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: Seq2SeqModel, path, vocab: Vocabulary | None = None) -> None:
    vocab = vocab if vocab is not None else model.vocab
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    cfg = json.dumps(model.config.to_dict(), sort_keys=True).encode("utf-8")
    buf.write(struct.pack("<I", len(cfg)) + cfg)
    vbytes = "\n".join(vocab.unit_of).encode("utf-8") if vocab is not None else b""
    buf.write(struct.pack("<I", len(vbytes)) + vbytes)
    state = model.state_dict()
    buf.write(struct.pack("<I", len(state)))
    for name, tensor in state.items():
        raw = name.encode("utf-8")
        arr = tensor.detach().cpu().numpy().astype("<f4")
        buf.write(struct.pack("<H", len(raw)) + raw)
        buf.write(struct.pack("<B", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.tobytes(order="C"))
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(buf.getvalue())
    tmp.replace(path)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"truncated checkpoint: needed {n} bytes at offset {self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path, vocab: Vocabulary | None = None) -> Seq2SeqModel:
    """Rebuild a model; if ``vocab`` is given its size must match the checkpoint."""
    r = _Reader(Path(path).read_bytes())
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path}: not a termnmt checkpoint (bad magic bytes)")
    (version,) = r.unpack("<I")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    (clen,) = r.unpack("<I")
    config = ModelConfig(**json.loads(r.take(clen).decode("utf-8")))
    (vlen,) = r.unpack("<I")
    stored_vocab = Vocabulary(r.take(vlen).decode("utf-8").split("\n")) if vlen else None
    if stored_vocab is not None and len(stored_vocab) != config.vocab_size:
        raise CheckpointError("stored vocabulary size disagrees with the model config")
    if vocab is not None and len(vocab) != config.vocab_size:
        raise CheckpointError(
            f"vocabulary size mismatch: checkpoint has {config.vocab_size}, supplied {len(vocab)}")
    model = Seq2SeqModel(config, vocab if vocab is not None else stored_vocab)
    expected = model.state_dict()
    (count,) = r.unpack("<I")
    state = {}
    for _ in range(count):
        (nlen,) = r.unpack("<H")
        name = r.take(nlen).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I") if ndim else ()
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(r.take(4 * n), dtype="<f4").reshape(shape)
        if name not in expected or tuple(expected[name].shape) != tuple(shape):
            raise CheckpointError(f"unexpected parameter block {name} {shape}")
        state[name] = torch.from_numpy(arr.astype(np.float32))
    if set(state) != set(expected):
        raise CheckpointError(f"missing parameter blocks: {sorted(set(expected) - set(state))}")
    if r.pos != len(r.data):
        raise CheckpointError("trailing bytes after parameter blocks")
    model.load_state_dict(state)
    model.eval()
    return model
