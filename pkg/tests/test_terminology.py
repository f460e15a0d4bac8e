import random

import pytest
from hypothesis import given, settings, strategies as st

from termnmt.corpus import ParallelCorpus, ParallelPair, tokenize
from termnmt.terminology import (
    AugmentationError,
    ConstraintMatch,
    MASK,
    TermEntry,
    Terminology,
    TerminologyError,
    annotate_corpus,
    apply_tada,
    check_tag_grammar,
    deaugment,
    exclude_overlap,
    format_constraints,
    load_terminology,
    match_terms,
    parse_constraints,
)

from oracles import max_disjoint, occurrences

FIG1_SRC = tokenize("His critics state that this will just increase the budgetary deficit .")
FIG1_TGT = tokenize("Seine Kritiker sagen , dass dies nur das Haushaltsdefizit erhöhen wird .")
FIG1_TERMS = Terminology.from_pairs([(("budgetary", "deficit"), ("Haushaltsdefizit",))])

FIG3_SRC = tokenize("If perpetrators have to leave the country quicker , that will boost security and "
                    "increase the general public 's approval of refugee politics .")
FIG3_TGT = tokenize("Wenn Straftäter schneller das Land verlassen müssten , erhöhe das aber die Sicherheit "
                    "und stärke auch die Zustimmung der Bevölkerung für die Flüchtlingspolitik .")
FIG3_TERMS = Terminology.from_pairs([
    (("general", "public"), ("Bevölkerung",)),
    (("approval",), ("Zustimmung",)),
])


def pair(src, tgt, i=0):
    return ParallelPair(tuple(src), tuple(tgt), i)


def test_load_terminology(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("budgetary deficit\tHaushaltsdefizit\n", encoding="utf-8")
    terms = load_terminology(p)
    assert len(terms) == 1
    e = terms.entries[0]
    assert e.source_tokens == ("budgetary", "deficit") and e.target_tokens == ("Haushaltsdefizit",)
    assert terms.lookup("budgetary") == [e]


def test_load_terminology_empty(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("", encoding="utf-8")
    assert len(load_terminology(p)) == 0


@pytest.mark.parametrize("line", ["a\tb\tc\n", "a b\n", "a\t \n"])
def test_load_terminology_errors(tmp_path, line):
    p = tmp_path / "t.tsv"
    p.write_text(line, encoding="utf-8")
    with pytest.raises(TerminologyError, match="line 0"):
        load_terminology(p)


def test_index_covers_entries():
    terms = Terminology.from_pairs([(("a", "b"), ("X",)), (("a",), ("Y",)), (("c",), ("Z",))])
    for e in terms:
        assert e in terms.lookup(e.source_tokens[0])
    assert sum(len(v) for v in terms.index.values()) == len(terms)


def test_fig1_match():
    m = match_terms(pair(FIG1_SRC, FIG1_TGT), FIG1_TERMS)
    assert len(m) == 1
    s, e = m[0].source_span
    assert FIG1_SRC[s:e] == ["budgetary", "deficit"]
    ts, te = m[0].target_span
    assert FIG1_TGT[ts:te] == ["Haushaltsdefizit"]


def test_empty_terminology_matches_nothing():
    assert match_terms(pair(FIG1_SRC, FIG1_TGT), Terminology()) == []


def test_target_side_required():
    assert match_terms(pair(FIG1_SRC, ["nichts"]), FIG1_TERMS) == []


def test_abab_example():
    terms = Terminology.from_pairs([(("a", "b"), ("X",))])
    m = match_terms(pair("a b a b".split(), ["X", "X"]), terms)
    assert [x.source_span for x in m] == [(0, 2), (2, 4)]
    assert [x.target_span for x in m] == [(0, 1), (1, 2)]
    # brute-force: the greedy count equals the best disjoint assignment
    best = min(max_disjoint(occurrences("a b a b".split(), ("a", "b"))),
               max_disjoint(occurrences(["X", "X"], ("X",))))
    assert len(m) == best


def test_longest_match_preferred_then_entry_id():
    terms = Terminology.from_pairs([(("a",), ("X",)), (("a", "b"), ("Y",)), (("a", "b"), ("Z",))])
    m = match_terms(pair(["a", "b"], ["Y", "Z", "X"]), terms)
    assert [x.entry_id for x in m] == [1]


def test_conflicting_entries_resolved_by_target():
    terms = Terminology.from_pairs([(("bank",), ("Ufer",)), (("bank",), ("Bank",))])
    assert match_terms(pair(["bank"], ["die", "Bank"]), terms)[0].entry_id == 1
    assert match_terms(pair(["bank"], ["das", "Ufer"]), terms)[0].entry_id == 0
    assert match_terms(pair(["bank"], ["Bank", "Ufer"]), terms)[0].entry_id == 0


def test_leftmost_unconsumed_target():
    terms = Terminology.from_pairs([(("a",), ("X",))])
    m = match_terms(pair(["a", "q", "a"], ["X", "Y", "X"]), terms)
    assert [x.target_span for x in m] == [(0, 1), (2, 3)]


words = st.sampled_from(["a", "b", "c"])


@settings(max_examples=300, deadline=None)
@given(st.lists(words, min_size=1, max_size=12), st.lists(words, min_size=1, max_size=12),
       st.lists(words, min_size=1, max_size=3), st.lists(words, min_size=1, max_size=2))
def test_single_entry_matches_brute_force(src, tgt, term_src, term_tgt):
    terms = Terminology([TermEntry(term_src, term_tgt, 0)])
    matches = match_terms(pair(src, tgt), terms)
    for m in matches:
        s, e = m.source_span
        ts, te = m.target_span
        assert tuple(src[s:e]) == tuple(term_src)
        assert tuple(tgt[ts:te]) == tuple(term_tgt)
    spans = sorted(m.source_span for m in matches)
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
    tspans = sorted(m.target_span for m in matches)
    assert all(a[1] <= b[0] for a, b in zip(tspans, tspans[1:]))
    expected = min(max_disjoint(occurrences(src, term_src)), max_disjoint(occurrences(tgt, term_tgt)))
    assert len(matches) == expected


def test_apply_tada_fig1():
    p = pair(FIG1_SRC, FIG1_TGT)
    m = match_terms(p, FIG1_TERMS)
    plain = apply_tada(p, m, mask=False)
    assert " ".join(plain.augmented_source).endswith(
        "the <S> budgetary deficit <C> Haushaltsdefizit </C> .")
    masked = apply_tada(p, m, mask=True)
    assert " ".join(masked.augmented_source).endswith("the <S> MASK MASK <C> Haushaltsdefizit </C> .")
    assert masked.original.target == p.target
    assert masked.target_constraint_mask == tuple(t == "Haushaltsdefizit" for t in FIG1_TGT)


def test_apply_tada_fig3_two_constraints():
    p = pair(FIG3_SRC, FIG3_TGT)
    m = match_terms(p, FIG3_TERMS)
    assert len(m) == 2
    text = " ".join(apply_tada(p, m, mask=True).augmented_source)
    assert "the <S> MASK MASK <C> Bevölkerung </C> 's <S> MASK <C> Zustimmung </C> of refugee" in text


def test_apply_tada_no_matches():
    p = pair(FIG1_SRC, FIG1_TGT)
    a = apply_tada(p, [], mask=True)
    assert a.augmented_source == p.source
    assert not any(a.target_constraint_mask)


def test_apply_tada_overlap_error():
    p = pair(["a", "b", "c"], ["X", "Y"])
    ms = [ConstraintMatch(0, (0, 2), (0, 1)), ConstraintMatch(1, (1, 3), (1, 2))]
    with pytest.raises(AugmentationError):
        apply_tada(p, ms)


@pytest.mark.parametrize("bad", [["<S>", "a"], ["<C>"], ["<S>", "<S>", "<C>", "</C>"], ["</C>"]])
def test_tag_grammar_violations(bad):
    with pytest.raises(AugmentationError):
        check_tag_grammar(bad)


vocab = st.sampled_from(["w%d" % i for i in range(6)])


@st.composite
def corpus_and_terms(draw):
    n_terms = draw(st.integers(0, 5))
    entries = [(tuple(draw(st.lists(vocab, min_size=1, max_size=2))),
                tuple(draw(st.lists(vocab, min_size=1, max_size=2)))) for _ in range(n_terms)]
    pairs = [pair(draw(st.lists(vocab, min_size=1, max_size=10)),
                  draw(st.lists(vocab, min_size=1, max_size=10)), i) for i in range(draw(st.integers(1, 6)))]
    return ParallelCorpus(pairs), Terminology.from_pairs(entries)


@settings(max_examples=200, deadline=None)
@given(corpus_and_terms(), st.booleans())
def test_augmentation_invariants(data, mask):
    corpus, terms = data
    for a in annotate_corpus(corpus, terms, 1.0, mask, seed=1):
        aug = a.augmented_source
        assert check_tag_grammar(aug) == len(a.matches)
        assert aug.count("<S>") == aug.count("<C>") == aug.count("</C>") == len(a.matches)
        assert deaugment(aug, a.matches, terms) == list(a.original.source)
        assert sum(a.target_constraint_mask) == sum(m.target_span[1] - m.target_span[0] for m in a.matches)
        if mask:
            # each tagged region holds one MASK per matched source token
            regions = " ".join(aug).split("<S>")[1:]
            for region, m in zip(regions, a.matches):
                body = region.split("<C>")[0].split()
                assert body == [MASK] * (m.source_span[1] - m.source_span[0])


def matchable_corpus(n):
    return ParallelCorpus([pair(["x", "a"], ["X"], i) for i in range(n)])


ONE = Terminology.from_pairs([(("x",), ("X",))])


def test_rate_zero_and_one():
    assert not any(a.annotated for a in annotate_corpus(matchable_corpus(20), ONE, 0.0))
    assert all(a.annotated for a in annotate_corpus(matchable_corpus(20), ONE, 1.0))


def test_rate_exact_count_and_determinism():
    out = annotate_corpus(matchable_corpus(1000), ONE, 0.1, mask=True, seed=7)
    assert sum(a.annotated for a in out) == 100
    again = annotate_corpus(matchable_corpus(1000), ONE, 0.1, mask=True, seed=7)
    assert out == again
    assert [a.original.id for a in out] == list(range(1000))
    other = annotate_corpus(matchable_corpus(1000), ONE, 0.1, mask=True, seed=8)
    assert [a.annotated for a in out] != [a.annotated for a in other]


def test_rate_capped_by_matchable():
    corpus = ParallelCorpus([pair(["x"] if i < 3 else ["y"], ["X"], i) for i in range(10)])
    out = annotate_corpus(corpus, ONE, 0.5)
    assert [a.annotated for a in out] == [True] * 3 + [False] * 7


@pytest.mark.parametrize("rate", [-0.1, 1.5])
def test_rate_out_of_range(rate):
    with pytest.raises(ValueError):
        annotate_corpus(matchable_corpus(3), ONE, rate)


def test_exclude_overlap():
    a = Terminology.from_pairs([(("a",), ("A",)), (("b",), ("B",)), (("c",), ("C",))])
    b = Terminology.from_pairs([(("b",), ("B",))])
    disjoint = Terminology.from_pairs([(("z",), ("Z",))])
    assert [e.key for e in exclude_overlap(a, disjoint)] == [e.key for e in a]
    assert len(exclude_overlap(a, a)) == 0
    left = exclude_overlap(a, b)
    assert [e.source_tokens for e in left] == [("a",), ("c",)]


def test_constraint_line_format():
    line = format_constraints([("Haushalts", "defizit"), ("Zustimmung",)])
    assert line == "Haushalts defizit ||| Zustimmung"
    assert parse_constraints(line) == [("Haushalts", "defizit"), ("Zustimmung",)]
    assert parse_constraints("") == []
