"""Train a small model on synthetic data and translate with unseen constraints.

Run: python demos/05_train_and_translate.py   (a few minutes on one core)
"""
# %% A reduced synthetic benchmark
import logging

from termnmt.experiment import RunSettings, run_system
from termnmt.synth import SynthSpec, generate

logging.basicConfig(level=logging.INFO, format="%(message)s")
bench = generate(SynthSpec(train_size=2000, valid_size=50, test_size=50))
print(bench.train.pairs[0])
print(bench.test_terms.entries[:3])

# %% Train with tags and masking; the test terms were never seen as annotations
settings = RunSettings(epochs=8, min_epochs=8, beam_size=5)
result = run_system(bench, "tada_mask", settings)
print(result.report.summary())
for pair, hyp in list(zip(bench.test, result.hypotheses))[:5]:
    print(" ".join(pair.source), "=>", " ".join(hyp))
