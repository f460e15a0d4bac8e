"""Tagging dictionary terms inside a parallel corpus.

Run: python demos/01_annotate_terms.py
"""
# %% A two-sentence corpus and a two-entry dictionary
from termnmt.corpus import ParallelCorpus, ParallelPair, tokenize
from termnmt.terminology import Terminology, annotate_corpus, deaugment, match_terms

pairs = [
    ParallelPair(tuple(tokenize("the heat pump needs a new pressure valve .")),
                 tuple(tokenize("die Wärmepumpe braucht ein neues Druckventil .")), 0),
    ParallelPair(tuple(tokenize("we replaced the pressure valve yesterday .")),
                 tuple(tokenize("wir haben das Ventil gestern ersetzt .")), 1),
]
corpus = ParallelCorpus(pairs, "en", "de")
terms = Terminology.from_pairs([
    (("heat", "pump"), ("Wärmepumpe",)),
    (("pressure", "valve"), ("Druckventil",)),
])

# %% Matching needs both sides: the second pair does not contain "Druckventil"
for pair in corpus:
    print(pair.id, [(m.source_span, m.target_span) for m in match_terms(pair, terms)])

# %% Inline tags keep the source term; MASK hides it behind placeholder tokens
for mask in (False, True):
    annotated = annotate_corpus(corpus, terms, rate=1.0, mask=mask, seed=0)
    print(" ".join(annotated[0].augmented_source))

# %% The original source can always be recovered from the tagged line
a = annotate_corpus(corpus, terms, rate=1.0, mask=True)[0]
print(deaugment(a.augmented_source, a.matches, terms) == list(a.original.source))

# %% Target tokens that belong to a constraint, later weighted by the loss
print([t for t, flag in zip(a.original.target, a.target_constraint_mask) if flag])
