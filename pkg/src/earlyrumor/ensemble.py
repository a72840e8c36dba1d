"""Interval-level ensemble features: CreditScore and CrowdWisdom."""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

ENSEMBLE_FEATURES = ("CrowdWisdom", "CreditScore")
NEUTRAL_CREDIT = 0.5


def _normalise(text: str) -> str:
    return " ".join(text.lower().split())


def load_debunk_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """Debunking phrases, one per line (``#`` comments allowed); bundled list by default."""
    if path is None:
        text = (resources.files("earlyrumor") / "data" / "debunk_words.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    phrases = frozenset(_normalise(line) for line in text.splitlines()
                        if line.strip() and not line.lstrip().startswith("#"))
    if not phrases:
        raise ValueError("debunk lexicon is empty")
    return phrases


def _p_news(pred) -> float:
    return float(getattr(pred, "p_news", pred))


def credit_score(predictions: Iterable, *, return_flag: bool = False):
    """Mean ``p_news`` over an interval's tweets; 0.5 for an empty interval.

    ``predictions`` may hold credibility predictions or bare probabilities.
    With ``return_flag`` the result is ``(score, is_empty)``.
    """
    values = [_p_news(p) for p in predictions]
    empty = not values
    score = NEUTRAL_CREDIT if empty else math.fsum(values) / len(values)
    return (score, empty) if return_flag else score


def contains_debunk(text: str, lexicon: frozenset[str]) -> bool:
    norm = _normalise(text)
    return any(phrase in norm for phrase in lexicon)


def crowd_wisdom(bucket, lexicon: frozenset[str]) -> float:
    """Fraction of tweets whose normalised text contains a debunking phrase (0 if empty)."""
    tweets: Sequence = bucket.tweets if hasattr(bucket, "tweets") else bucket
    if not tweets:
        return 0.0
    texts = [t if isinstance(t, str) else t.text for t in tweets]
    return sum(contains_debunk(t, lexicon) for t in texts) / len(texts)
