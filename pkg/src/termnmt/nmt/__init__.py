from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import Batch, Example, collate, encode_pairs, make_batches
from .decoding import beam_search, greedy_decode, translate_ids
from .loss import PROB_FLOOR, constraint_weights, wce_loss, wce_loss_from_logits
from .model import ModelConfig, Seq2SeqModel, forward
from .training import EpochLog, TrainConfig, TrainConfigError, train
from .vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, Vocabulary

__all__ = [
    "Batch", "BOS_ID", "CheckpointError", "EOS_ID", "EpochLog", "Example", "ModelConfig",
    "PAD_ID", "PROB_FLOOR", "Seq2SeqModel", "TrainConfig", "TrainConfigError", "UNK_ID",
    "Vocabulary", "beam_search", "collate", "constraint_weights", "encode_pairs", "forward",
    "greedy_decode", "load_checkpoint", "make_batches", "save_checkpoint", "train",
    "translate_ids", "wce_loss", "wce_loss_from_logits",
]
