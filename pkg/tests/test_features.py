from __future__ import annotations

import statistics
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from earlyrumor.features import (
    TEXT_FEATURES,
    TWITTER_FEATURES,
    USER_FEATURES,
    LookupTables,
    TableError,
    classify_url,
    extract_text_features,
    extract_twitter_features,
    extract_user_features,
    load_tables,
    polarity_score,
    registrable_domain,
    tokenize,
)
from earlyrumor.ingestion import IntervalBucket, UserProfile

import oracles
from conftest import FIXTURES, T0, make_tweet

TABLES = load_tables()
LEX = TABLES.sentiment_lexicon

WORDS = ["good", "bad", "hoax", "love", "via", "Via", "you", "I", "she", "they're", "the",
         "news", "OMG", "wow", "true", "terrible", "$AAPL", "U.S.", "(great)", "fake!", "é",
         "naïve", "😀", "…", "«calm»"]
MARKS = [":-)", ":)", ";->", ":(", ";-<", "??", "!!", "?!", "!?", "?", "!", "$", "", "", ""]
DOMAINS = ["http://bbc.com/x", "https://www.bbc.com/y", "http://news.bbc.co.uk/a",
           "https://viral-truth.example/1", "http://unknown-site.org/", "not a url",
           "http://localhost/x", "https://cnn.com", "http://bit.ly/3", "ftp://"]
LOCATIONS = [None, "", "New York", "london, uk", "Springfield", "PARIS", "a tiny village"]

text_st = st.lists(st.sampled_from(WORDS + MARKS), max_size=12).map(" ".join)


@st.composite
def tweets_st(draw, i):
    join = draw(st.one_of(st.none(), st.integers(-5000, 100)))
    author = UserProfile(
        followers_count=draw(st.integers(0, 10**6)),
        friends_count=draw(st.integers(0, 5000)),
        statuses_count=draw(st.integers(0, 10**5)),
        photos_count=draw(st.integers(0, 500)),
        verified=draw(st.booleans()),
        has_description=draw(st.booleans()),
        location=draw(st.sampled_from(LOCATIONS)) or None,
        join_date=None if join is None else T0 + timedelta(days=join),
    )
    return make_tweet(i, draw(text_st), draw(st.floats(0, 59)), author=author,
                      urls=tuple(draw(st.lists(st.sampled_from(DOMAINS), max_size=3))),
                      hashtags=tuple(draw(st.lists(st.just("#x"), max_size=2))),
                      mentions=tuple(draw(st.lists(st.just("@y"), max_size=2))),
                      is_retweet=draw(st.booleans()),
                      retweet_count=draw(st.integers(0, 1000)))


@st.composite
def buckets_st(draw, max_size=40):
    n = draw(st.integers(0, max_size))
    return IntervalBucket(0, [draw(tweets_st(i)) for i in range(n)])


def assert_matches_oracle(bucket):
    np.testing.assert_allclose(extract_text_features(bucket, LEX),
                               oracles.text_block([t.text for t in bucket.tweets], LEX),
                               rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(extract_twitter_features(bucket, TABLES),
                               oracles.twitter_block(bucket.tweets, TABLES), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(extract_user_features(bucket, TABLES),
                               oracles.user_block(bucket.tweets, TABLES), rtol=1e-12, atol=1e-12)


@settings(max_examples=200)
@given(buckets_st())
def test_blocks_match_naive_oracle(bucket):
    assert_matches_oracle(bucket)


@given(buckets_st(15), st.randoms(use_true_random=False))
def test_blocks_permutation_invariant(bucket, rnd):
    shuffled = IntervalBucket(0, rnd.sample(bucket.tweets, len(bucket.tweets)))
    for f in (lambda b: extract_text_features(b, LEX), lambda b: extract_twitter_features(b, TABLES),
              lambda b: extract_user_features(b, TABLES)):
        np.testing.assert_array_equal(f(bucket), f(shuffled))


@given(buckets_st(15))
def test_blocks_bounded(bucket):
    text = extract_text_features(bucket, LEX)
    fractions = [TEXT_FEATURES.index(k) for k in ("Capital", "Smile", "Sad", "Via", "Stock",
                                                 "Question", "Exclamation",
                                                 "QuestionExclamation", "I", "You", "HeShe")]
    assert np.all((text[fractions] >= 0) & (text[fractions] <= 1))
    assert -1 <= text[TEXT_FEATURES.index("PolarityScores")] <= 1
    tw = extract_twitter_features(bucket, TABLES)
    assert np.all(tw >= 0)
    for k in ("Hashtag", "Mention", "IsRetweet", "ContainNEWS", "URLRank5000", "ContainNewsURL"):
        assert 0 <= tw[TWITTER_FEATURES.index(k)] <= 1
    us = extract_user_features(bucket, TABLES)
    assert np.all(us >= 0)
    for k in ("UserIsInLargeCity", "UserDescription", "UserVerified", "UserReputationScore"):
        assert 0 <= us[USER_FEATURES.index(k)] <= 1


def test_empty_bucket_defaults():
    empty = IntervalBucket(0, [])
    assert not extract_text_features(empty, LEX).any()
    tw = extract_twitter_features(empty, TABLES)
    assert tw[TWITTER_FEATURES.index("WotScore")] == 50.0 and tw.sum() == 50.0
    assert not extract_user_features(empty, TABLES).any()


def test_polarity_examples():
    assert polarity_score("", {}) == 0.0
    assert polarity_score("good good bad", {"good": 1.0, "bad": -1.0}) == pytest.approx(1 / 3)


def test_text_predicates():
    block = extract_text_features([make_tweet(0, "OMG!! Is this true?? :-)")], LEX)
    f = dict(zip(TEXT_FEATURES, block))
    assert (f["Question"], f["Exclamation"], f["QuestionExclamation"], f["Smile"], f["Sad"]) == (1, 1, 1, 1, 0)
    assert dict(zip(TEXT_FEATURES, extract_text_features([make_tweet(0, "AbC")], LEX)))["Capital"] == pytest.approx(2 / 3)


def test_tokenize_rule():
    assert tokenize("  Hello, WORLD!!  (ok) ") == ["hello", "world", "ok"]
    assert tokenize("... !!") == []


def test_hashtag_fraction_and_no_url_defaults():
    b = [make_tweet(0, hashtags=("#x",)), make_tweet(1)]
    f = dict(zip(TWITTER_FEATURES, extract_twitter_features(b, TABLES)))
    assert f["Hashtag"] == 0.5 and f["WotScore"] == 50.0 and f["URLRank5000"] == 0.0


def test_classify_url_examples():
    tables = load_tables()
    assert classify_url("http://bbc.com/x", tables) == (True, True, 93.0)
    assert classify_url("http://nowhere-at-all.net/", tables) == (False, False, 50.0)
    assert classify_url("not a url", tables) == (False, False, 50.0)
    assert tables.unparseable_urls == 1


def test_registrable_domain():
    assert registrable_domain("https://news.bbc.com/a") == "bbc.com"
    assert registrable_domain("http://www.bbc.co.uk/") == "bbc.co.uk"
    assert registrable_domain("nope") is None


def test_user_reputation_examples(user):
    f = dict(zip(USER_FEATURES, extract_user_features([make_tweet(0, author=user)], TABLES)))
    assert f["UserReputationScore"] == 0.25
    assert f["UserJoinDate"] == 10.0 and f["UserIsInLargeCity"] == 1.0
    zero = UserProfile()
    f = dict(zip(USER_FEATURES, extract_user_features([make_tweet(0, author=zero)], TABLES)))
    assert f["UserReputationScore"] == 0.0


def _fixture_texts(name):
    lines = (FIXTURES / name).read_text(encoding="utf-8").splitlines()
    return [ln for ln in lines if ln.strip() and not ln.startswith("#")]


def test_polarity_ordering_on_fixtures():
    rumor = statistics.mean(polarity_score(t, LEX) for t in _fixture_texts("rumor_tweets.txt"))
    news = statistics.mean(polarity_score(t, LEX) for t in _fixture_texts("news_tweets.txt"))
    assert rumor < news


def test_missing_table_file(tmp_path):
    with pytest.raises(TableError):
        load_tables(tmp_path)


def test_bad_polarity_rejected(tmp_path):
    for name in ("domain_rank.tsv", "domain_category.tsv", "wot.tsv", "cities.txt",
                 "news_domains.txt"):
        (tmp_path / name).write_text("")
    (tmp_path / "lexicon.tsv").write_text("good\t3\n")
    with pytest.raises(TableError):
        load_tables(tmp_path)


def test_lookup_defaults():
    t = LookupTables()
    assert t.rank("x.com") == float("inf") and not t.is_news("x.com") and t.wot(None) == 50.0
    assert not t.in_large_city(None)
