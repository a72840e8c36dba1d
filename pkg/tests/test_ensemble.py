from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from earlyrumor.credibility import CredibilityPrediction
from earlyrumor.ensemble import contains_debunk, credit_score, crowd_wisdom, load_debunk_lexicon
from earlyrumor.ingestion import IntervalBucket

from conftest import make_tweet

LEX = load_debunk_lexicon()
TEXTS = ["this is a hoax", "great news", "NOT   true at all", "Fake!", "calm morning",
         "police confirm", "no EVIDENCE so far", "what a day", "fakery", ""]


def test_credit_score_examples():
    assert credit_score([0.9, 0.7, 0.8]) == pytest.approx(0.8, abs=1e-15)
    assert credit_score([CredibilityPrediction(0.2), CredibilityPrediction(0.4)]) == pytest.approx(0.3)
    assert credit_score([], return_flag=True) == (0.5, True)
    assert credit_score([0.3], return_flag=True) == (0.3, False)


def test_credit_score_matches_naive_mean():
    values = np.random.default_rng(0).random(500)
    naive = 0.0
    for v in values:
        naive += v
    assert abs(credit_score(values.tolist()) - naive / 500) <= 1e-12


@given(st.lists(st.floats(0, 1), max_size=50), st.randoms(use_true_random=False))
def test_credit_score_bounded_and_permutation_invariant(values, rnd):
    s = credit_score(values)
    assert 0.0 <= s <= 1.0
    assert credit_score(rnd.sample(values, len(values))) == s


def test_crowd_wisdom_examples():
    assert crowd_wisdom(["this is a hoax", "great news"], LEX) == 0.5
    assert crowd_wisdom(["NOT TRUE at all"], frozenset({"not true"})) == 1.0
    assert crowd_wisdom(IntervalBucket(0, []), LEX) == 0.0
    bucket = IntervalBucket(0, [make_tweet(0, "is this a HOAX?"), make_tweet(1, "ok")])
    assert crowd_wisdom(bucket, LEX) == 0.5


def test_phrase_matching_normalises_whitespace():
    assert contains_debunk("Not\n\ttrue", frozenset({"not true"}))
    assert not contains_debunk("nottrue", frozenset({"not true"}))


@given(st.lists(st.sampled_from(TEXTS), max_size=30), st.sampled_from(["a hoax", "FAKE", "debunked!"]))
def test_crowd_wisdom_monotone(texts, debunk):
    before = crowd_wisdom(texts, LEX)
    after = crowd_wisdom(texts + [debunk], LEX)
    assert 0.0 <= before <= after <= 1.0


def test_lexicon_loading(tmp_path):
    assert {"hoax", "rumor", "not true"} <= LEX
    custom = tmp_path / "words.txt"
    custom.write_text("# comment\n  Not   TRUE \n\n")
    assert load_debunk_lexicon(custom) == frozenset({"not true"})
    custom.write_text("# only a comment\n")
    with pytest.raises(ValueError):
        load_debunk_lexicon(custom)
