"""Per-interval Text (16), Twitter (9) and User (9) feature blocks."""
from __future__ import annotations

import math
import unicodedata
from datetime import datetime
from typing import Sequence

import numpy as np

from ..ingestion import Tweet
from .lookup import LookupTables, classify_url, registrable_domain

TEXT_FEATURES = (
    "LengthOfTweet", "NumOfChar", "Capital", "Smile", "Sad", "NumPositiveWords",
    "NumNegativeWords", "PolarityScores", "Via", "Stock", "Question", "Exclamation",
    "QuestionExclamation", "I", "You", "HeShe",
)
TWITTER_FEATURES = (
    "Hashtag", "Mention", "NumUrls", "Retweets", "IsRetweet", "ContainNEWS", "WotScore",
    "URLRank5000", "ContainNewsURL",
)
USER_FEATURES = (
    "UserNumFollowers", "UserNumFriends", "UserNumTweets", "UserNumPhotos", "UserIsInLargeCity",
    "UserJoinDate", "UserDescription", "UserVerified", "UserReputationScore",
)

SMILE = (":->", ":-)", ";->", ";-)", ":)", ";)")
SAD = (":-<", ":-(", ";-<", ";-(", ":(", ";(")
MULTI_MARKS = ("??", "!!", "?!", "!?")
FIRST_PERSON = frozenset({"i", "me", "my", "mine", "myself", "we", "us", "our", "ours",
                          "ourselves", "i'm", "i've", "i'll", "i'd", "we're", "we've"})
SECOND_PERSON = frozenset({"u", "you", "your", "yours", "yourself", "yourselves", "ur",
                           "you're", "you've", "ya"})
THIRD_PERSON = frozenset({"he", "she", "they", "him", "her", "his", "hers", "them", "their",
                          "theirs", "himself", "herself", "themselves", "he's", "she's",
                          "they're"})
SECONDS_PER_DAY = 86400.0


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on Unicode whitespace, strip edge punctuation, drop empties."""
    out = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if start < end:
            out.append(raw[start:end])
    return out


def polarity_score(text: str, lexicon: dict[str, float]) -> float:
    """Mean lexicon polarity over all tokens; unknown tokens count as 0."""
    tokens = tokenize(text)
    if not tokens:
        return 0.0
    return sum(lexicon.get(t, 0.0) for t in tokens) / len(tokens)


def _text_row(text: str, lexicon: dict[str, float]) -> list[float]:
    tokens = tokenize(text)
    token_set = set(tokens)
    alpha = [c for c in text if c.isalpha()]
    upper = sum(1 for c in alpha if c.isupper())
    pols = [lexicon.get(t, 0.0) for t in tokens]
    return [
        float(len(text)),
        float(len(set(text))),
        upper / len(alpha) if alpha else 0.0,
        float(any(e in text for e in SMILE)),
        float(any(e in text for e in SAD)),
        float(sum(1 for p in pols if p > 0)),
        float(sum(1 for p in pols if p < 0)),
        sum(pols) / len(pols) if pols else 0.0,
        float("via" in token_set),
        float("$" in text),
        float("?" in text),
        float("!" in text),
        float(any(m in text for m in MULTI_MARKS)),
        float(bool(token_set & FIRST_PERSON)),
        float(bool(token_set & SECOND_PERSON)),
        float(bool(token_set & THIRD_PERSON)),
    ]


def _tweets_of(bucket) -> Sequence[Tweet]:
    # accept an IntervalBucket or a plain sequence of tweets
    return bucket.tweets if hasattr(bucket, "tweets") else bucket


def _mean_rows(rows: list[list[float]], width: int) -> np.ndarray:
    if not rows:
        return np.zeros(width)
    # math.fsum per column keeps the mean independent of tweet order
    n = len(rows)
    return np.array([math.fsum(r[j] for r in rows) / n for j in range(width)])


def extract_text_features(bucket, lexicon: dict[str, float]) -> np.ndarray:
    """16 text features averaged over the bucket's tweets; zeros for an empty bucket."""
    return _mean_rows([_text_row(t.text, lexicon) for t in _tweets_of(bucket)], len(TEXT_FEATURES))


def _twitter_row(tw: Tweet, tables: LookupTables) -> tuple[list[float], list[float]]:
    flags = [classify_url(u, tables) for u in tw.urls]
    domains = [registrable_domain(u) for u in tw.urls]
    row = [
        float(bool(tw.hashtags)),
        float(bool(tw.mentions)),
        float(len(tw.urls)),
        float(tw.retweet_count),
        float(tw.is_retweet),
        float(any(f[0] for f in flags)),
        0.0,  # WotScore is pooled over URLs, filled in by the caller
        float(any(f[1] for f in flags)),
        float(any(d in tables.news_domains for d in domains if d)),
    ]
    return row, [f[2] for f in flags]


def extract_twitter_features(bucket, tables: LookupTables) -> np.ndarray:
    """9 Twitter features; WotScore is the mean over every URL in the bucket (50 when none)."""
    rows, wots = [], []
    for tw in _tweets_of(bucket):
        row, w = _twitter_row(tw, tables)
        rows.append(row)
        wots.extend(w)
    out = _mean_rows(rows, len(TWITTER_FEATURES))
    out[6] = math.fsum(wots) / len(wots) if wots else 50.0
    return out


def _user_row(tw: Tweet, tables: LookupTables, at: datetime | None) -> list[float]:
    u = tw.author
    ref = at if at is not None else tw.created_at
    days = 0.0
    if u.join_date is not None:
        days = max((ref - u.join_date).total_seconds() / SECONDS_PER_DAY, 0.0)
    social = u.followers_count + u.friends_count
    return [
        float(u.followers_count),
        float(u.friends_count),
        float(u.statuses_count),
        float(u.photos_count),
        float(tables.in_large_city(u.location)),
        days,
        float(u.has_description),
        float(u.verified),
        u.friends_count / social if social > 0 else 0.0,
    ]


def extract_user_features(bucket, tables: LookupTables,
                          at: datetime | None = None) -> np.ndarray:
    """9 user features averaged per tweet (an author posting twice counts twice).

    ``at`` overrides the reference time for account age; by default each
    tweet's own timestamp is used.
    """
    return _mean_rows([_user_row(t, tables, at) for t in _tweets_of(bucket)], len(USER_FEATURES))
