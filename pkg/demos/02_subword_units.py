"""Joint byte-pair encoding with protected tag tokens.

Run: python demos/02_subword_units.py
"""
# %%
from collections import Counter

from termnmt.subword import apply_bpe, join_bpe, learn_bpe

text = "lower lowest newer newest wider widest <S> MASK <C> Druckventil </C>".split()
model = learn_bpe(Counter(text * 5), num_merges=12)
print(model.merges)

# %% Tags pass through unchanged; continuation units end in "@@"
units = apply_bpe(model, text)
print(" ".join(units))

# %% Joining undoes the segmentation exactly
print(join_bpe(units) == text)
