import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from termnmt.corpus import tokenize
from termnmt.subword import BpeError, BpeModel, apply_bpe, join_bpe, learn_bpe

from oracles import bpe_oracle


def test_single_pair():
    assert learn_bpe(["aa"] * 5, 1).merges == [("a", "a")]


def test_low_lowest_matches_oracle():
    corpus = ["low"] * 5 + ["lowest"] * 2
    model = learn_bpe(corpus, 2)
    # pair counts: (l,o)=7, (o,w)=7 -> tie broken lexicographically; then (lo,w)=7
    assert model.merges == bpe_oracle({"low": 5, "lowest": 2}, 2) == [("l", "o"), ("lo", "w")]


def test_stops_early():
    model = learn_bpe(["ab"] * 3, 50)
    assert model.merges == [("a", "b")]
    assert apply_bpe(model, ["ab", "ba"]) == ["ab", "b@@", "a"]


def test_empty_corpus_and_bad_merges():
    with pytest.raises(BpeError):
        learn_bpe([], 5)
    with pytest.raises(BpeError):
        learn_bpe(["<S>", "MASK"], 5)
    with pytest.raises(BpeError):
        learn_bpe(["ab"], 0)


def test_protected_pass_through():
    model = learn_bpe(["SSSS", "MASK"] * 10, 10)
    assert apply_bpe(model, ["<S>", "MASK", "<C>"]) == ["<S>", "MASK", "<C>"]
    assert apply_bpe(model, []) == []
    assert join_bpe([]) == []


def test_protected_excluded_from_statistics():
    model = learn_bpe(["MASK"] * 10 + ["xy"] * 2, 10)
    assert model.merges == [("x", "y")]


def test_fig1_round_trip():
    toks = tokenize("His critics state that this will just increase the <S> budgetary deficit "
                    "<C> Haushaltsdefizit </C> .")
    model = learn_bpe(Counter(toks), 30)
    units = apply_bpe(model, toks)
    assert join_bpe(units) == toks
    assert units.count("<S>") == 1


def test_dangling_marker():
    with pytest.raises(BpeError):
        join_bpe(["ab@@"])


def test_unseen_token_falls_back_to_known_units():
    model = learn_bpe(["abab"] * 4, 10)
    units = apply_bpe(model, ["zab"])
    assert units == ["z@@", "ab"]


def test_no_duplicate_merges():
    with pytest.raises(BpeError):
        BpeModel([("a", "b"), ("a", "b")])


def test_save_load(tmp_path):
    model = learn_bpe(["lower", "lowest", "newer"] * 3, 20, protected=["<X>"])
    path = tmp_path / "bpe.codes"
    model.save(path)
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("#termnmt-bpe 1")
    again = BpeModel.load(path)
    assert again.merges == model.merges and "<X>" in again.protected


def test_load_bad_header(tmp_path):
    path = tmp_path / "bpe.codes"
    path.write_text("a b\n", encoding="utf-8")
    with pytest.raises(BpeError):
        BpeModel.load(path)


def random_corpus(rng: random.Random, n_types: int) -> dict[str, int]:
    letters = "abcde"
    words = {"".join(rng.choice(letters) for _ in range(rng.randint(1, 7))) for _ in range(n_types)}
    return {w: rng.randint(1, 9) for w in words}


@pytest.mark.parametrize("seed", range(10))
def test_learn_matches_oracle(seed):
    rng = random.Random(seed)
    counts = random_corpus(rng, 50)
    model = learn_bpe(Counter(counts), 40)
    assert model.merges == bpe_oracle(counts, 40)


def test_monotone_prefix():
    counts = Counter(random_corpus(random.Random(3), 50))
    short = learn_bpe(counts, 10).merges
    long = learn_bpe(counts, 25).merges
    assert long[:len(short)] == short


tokens = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Zs", "Cc", "Zl", "Zp")),
                 min_size=1, max_size=12).filter(lambda t: not t.endswith("@@") and not any(c.isspace() for c in t))
MODEL = learn_bpe(Counter(random_corpus(random.Random(0), 50)), 60)


@settings(max_examples=300)
@given(st.lists(tokens, max_size=8))
def test_round_trip_property(toks):
    units = apply_bpe(MODEL, toks)
    assert join_bpe(units) == toks
    assert all(u in MODEL.protected or not any(p == u for p in ("<S>@@",)) for u in units)
