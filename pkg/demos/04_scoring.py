"""BLEU and the share of dictionary terms that made it into the output.

Run: python demos/04_scoring.py
"""
# %%
from termnmt.evaluation import evaluate

refs = [["die", "Wärmepumpe", "braucht", "ein", "neues", "Druckventil", "."]]
hyps = [["die", "Wärmepumpe", "braucht", "ein", "neues", "Ventil", "."]]
constraints = [[("Wärmepumpe",), ("Druckventil",)]]

report = evaluate(hyps, refs, constraints)
print(report.summary())
print(report.ngram_precisions, report.brevity_penalty)
