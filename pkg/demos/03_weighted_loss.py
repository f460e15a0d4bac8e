"""Weighted cross-entropy: up-weighting constraint tokens.

Run: python demos/03_weighted_loss.py
"""
# %%
import torch
import torch.nn.functional as F

from termnmt.nmt import constraint_weights, wce_loss

torch.manual_seed(0)
logits = torch.randn(1, 5, 8, dtype=torch.float64)
targets = torch.tensor([[3, 1, 4, 1, 5]])
constraint = torch.tensor([[False, False, True, True, False]])
padding = torch.tensor([[False, False, False, False, True]])

# %% alpha = 1 is ordinary cross-entropy (padding excluded)
w1 = constraint_weights(constraint, padding, alpha=1.0).double()
ce = F.cross_entropy(logits[0, :4], targets[0, :4], reduction="sum")
print(float(wce_loss(torch.softmax(logits, -1), targets, w1)), float(ce))

# %% alpha = 2 adds one extra -log p for each constraint token
w2 = constraint_weights(constraint, padding, alpha=2.0).double()
print(w2.tolist())
print(float(wce_loss(torch.softmax(logits, -1), targets, w2)))
