"""Terminology-constrained NMT toolkit: tag augmentation, token masking,
weighted cross-entropy training, BLEU and Term% scoring."""

__version__ = "0.1.0"
