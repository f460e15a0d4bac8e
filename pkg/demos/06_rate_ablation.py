"""Term% as the share of annotated training sentences shrinks.

Run: python demos/06_rate_ablation.py   (long: one model per cell)
The same table is produced by ``termnmt ablation --out-dir runs/ablation``.
"""
# %%
import logging

from termnmt.experiment import RunSettings, ablation
from termnmt.synth import SynthSpec

logging.basicConfig(level=logging.INFO, format="%(message)s")
cells = ablation(SynthSpec(), RunSettings(), rates=(0.10, 0.01), seeds=(0,))
for cell in cells:
    print(f"{cell.system:10s} rate {cell.rate:.2f}  Term% {cell.term_pct:.1f}  BLEU {cell.bleu:.1f}")
