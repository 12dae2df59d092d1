import random

import pytest

from passageval.corpus import AnchorSpan, Passage
from passageval.textproc import (
    Gram,
    PAIR_SEPARATOR,
    Preprocessor,
    UnitBag,
    UnitKind,
    default_stoplist,
    extract_units,
    load_stoplist,
    pair_unit,
    remove_stopwords,
    restrict_to_anchors,
    sum_bags,
    tokenize,
)

from oracles import oracle_bigrams, oracle_skipgrams_gap1

UNI = UnitKind(Gram.UNIGRAM)
BI = UnitKind(Gram.BIGRAM)
SK = UnitKind(Gram.SKIP_GAP1)


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("The U.S. wins!") == ["the", "u", "s", "wins"]

    def test_empty(self):
        assert tokenize("") == []

    def test_single_token(self):
        assert tokenize("abc") == ["abc"]

    def test_digits_retained(self):
        assert tokenize("In 2012, 63 topics.") == ["in", "2012", "63", "topics"]

    def test_underscore_splits(self):
        assert tokenize("new_york") == ["new", "york"]

    def test_unicode_letters_kept(self):
        assert tokenize("Café au lait") == ["café", "au", "lait"]


class TestStopwords:
    def test_removal(self):
        assert remove_stopwords(["the", "cat"], frozenset({"the"})) == ["cat"]

    def test_empty_stoplist_identity(self):
        assert remove_stopwords(["cat"], frozenset()) == ["cat"]

    def test_all_removed(self):
        assert remove_stopwords(["the", "the"], frozenset({"the"})) == []

    def test_order_preserved(self):
        tokens = ["b", "the", "a", "c"]
        assert remove_stopwords(tokens, frozenset({"the"})) == ["b", "a", "c"]

    def test_default_stoplist_has_common_words(self):
        stoplist = default_stoplist()
        assert {"the", "and", "of", "a"} <= stoplist
        assert "volcano" not in stoplist

    def test_load_stoplist_file(self, tmp_path):
        path = tmp_path / "stop.txt"
        path.write_text("# comment\nthe\n\nand\n", encoding="utf-8")
        assert load_stoplist(path) == frozenset({"the", "and"})


class TestExtractUnits:
    def test_bigrams(self):
        bag = extract_units(["a", "b", "c"], BI)
        assert bag.units == {pair_unit("a", "b"): 1, pair_unit("b", "c"): 1}
        assert bag.total == 2

    def test_skipgrams_gap1(self):
        bag = extract_units(["a", "b", "c"], SK)
        assert bag.units == {
            pair_unit("a", "b"): 1,
            pair_unit("b", "c"): 1,
            pair_unit("a", "c"): 1,
        }
        assert bag.total == 3

    def test_single_token_bigram_empty(self):
        bag = extract_units(["a"], BI)
        assert bag.units == {}
        assert bag.total == 0

    def test_unigram_counts_duplicates(self):
        bag = extract_units(["a", "b", "a"], UNI)
        assert bag.units == {"a": 2, "b": 1}
        assert bag.total == 3

    def test_strict_skipgrams_distance_two_only(self):
        bag = extract_units(["a", "b", "c"], SK, strict_skipgrams=True)
        assert bag.units == {pair_unit("a", "c"): 1}

    def test_separator_is_reserved(self):
        assert PAIR_SEPARATOR not in tokenize("a" + PAIR_SEPARATOR + "b")[0]

    def test_matches_enumeration_oracle(self):
        rng = random.Random(7)
        vocab = ["u", "v", "w", "x"]
        for _ in range(100):
            tokens = [rng.choice(vocab) for _ in range(rng.randint(0, 20))]
            assert extract_units(tokens, BI).units == oracle_bigrams(tokens)
            assert (extract_units(tokens, SK).units
                    == oracle_skipgrams_gap1(tokens))

    def test_totals(self):
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(0, 20)
            tokens = [f"w{rng.randrange(6)}" for _ in range(n)]
            assert extract_units(tokens, UNI).total == n
            assert extract_units(tokens, BI).total == max(0, n - 1)
            assert (extract_units(tokens, SK).total
                    == max(0, n - 1) + max(0, n - 2))

    def test_unigram_permutation_invariance(self):
        rng = random.Random(13)
        tokens = [rng.choice("abcd") for _ in range(15)]
        reference = extract_units(tokens, UNI)
        for _ in range(50):
            shuffled = tokens[:]
            rng.shuffle(shuffled)
            assert extract_units(shuffled, UNI) == reference


class TestAnchors:
    def test_anchor_tokens_only(self):
        text = "see Paris and Berlin"
        passage = Passage("p", "t", text, 1.0, anchors=(
            AnchorSpan(4, 9, "Paris"), AnchorSpan(14, 20, "Berlin"),
        ))
        assert restrict_to_anchors(passage) == ["paris", "berlin"]

    def test_no_anchors_empty(self):
        passage = Passage("p", "t", "no links here", 1.0)
        assert restrict_to_anchors(passage) == []

    def test_full_span_equals_unrestricted(self):
        text = "Granite peaks tower above"
        passage = Passage("p", "t", text, 1.0,
                          anchors=(AnchorSpan(0, len(text), "Peak"),))
        assert restrict_to_anchors(passage) == tokenize(text)

    def test_document_order(self):
        text = "alpha beta gamma"
        passage = Passage("p", "t", text, 1.0, anchors=(
            AnchorSpan(11, 16, "G"), AnchorSpan(0, 5, "A"),
        ))
        assert restrict_to_anchors(passage) == ["alpha", "gamma"]


class TestPreprocessor:
    def test_pipeline_stop_then_stem(self):
        pre = Preprocessor(frozenset({"the"}))
        assert pre.tokens("The ponies are running") == ["poni", "ar", "run"]

    def test_deterministic(self):
        pre = Preprocessor()
        text = "Assessors graded the pooled passages carefully."
        assert pre.text_bag(text, UNI) == pre.text_bag(text, UNI)

    def test_entity_restricted_bag(self):
        pre = Preprocessor(frozenset())
        passage = Passage("p", "t", "visit Paris today", 1.0,
                          anchors=(AnchorSpan(6, 11, "Paris"),))
        bag = pre.passage_bag(passage, UnitKind(Gram.UNIGRAM, entity_restricted=True))
        assert bag.units == {"pari": 1}

    def test_restricted_tokens_are_stemmed(self):
        pre = Preprocessor(frozenset())
        passage = Passage("p", "t", "running shoes", 1.0,
                          anchors=(AnchorSpan(0, 7, "Running"),))
        assert pre.passage_tokens(passage, entity_restricted=True) == ["run"]


class TestBags:
    def test_sum_bags(self):
        a = UnitBag.from_counts(UNI, {"x": 1, "y": 2})
        b = UnitBag.from_counts(UNI, {"y": 1, "z": 1})
        total = sum_bags(UNI, [a, b])
        assert total.units == {"x": 1, "y": 3, "z": 1}
        assert total.total == 5

    def test_sum_bags_kind_mismatch(self):
        a = UnitBag.from_counts(UNI, {"x": 1})
        with pytest.raises(ValueError, match="kind"):
            sum_bags(BI, [a])

    def test_from_counts_drops_nonpositive(self):
        bag = UnitBag.from_counts(UNI, {"x": 2, "y": 0})
        assert bag.units == {"x": 2}
        assert bag.total == 2
