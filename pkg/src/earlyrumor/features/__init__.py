"""Interval feature blocks and the offline lookup tables they use."""
from .blocks import (
    TEXT_FEATURES,
    TWITTER_FEATURES,
    USER_FEATURES,
    extract_text_features,
    extract_twitter_features,
    extract_user_features,
    polarity_score,
    tokenize,
)
from .lookup import LookupTables, TableError, classify_url, load_tables, registrable_domain

__all__ = [
    "TEXT_FEATURES", "TWITTER_FEATURES", "USER_FEATURES", "LookupTables", "TableError",
    "classify_url", "extract_text_features", "extract_twitter_features",
    "extract_user_features", "load_tables", "polarity_score", "registrable_domain", "tokenize",
]
