"""Offline reputation tables for URLs, large-city names and the sentiment lexicon."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit

UNKNOWN_RANK = math.inf
NEUTRAL_WOT = 50.0
RANK_CUTOFF = 5000

# second-level labels under which registrations happen one level deeper
_SECOND_LEVEL = {"co", "com", "net", "org", "gov", "ac", "edu", "go", "ne", "or"}

TABLE_FILES = {
    "domain_rank": "domain_rank.tsv",
    "domain_category": "domain_category.tsv",
    "wot_score": "wot.tsv",
    "large_cities": "cities.txt",
    "sentiment_lexicon": "lexicon.tsv",
    "news_domains": "news_domains.txt",
}


class TableError(ValueError):
    """A lookup table file is missing or malformed."""


@dataclass
class LookupTables:
    domain_rank: dict[str, int] = field(default_factory=dict)
    domain_category: dict[str, str] = field(default_factory=dict)
    wot_score: dict[str, float] = field(default_factory=dict)
    large_cities: frozenset[str] = frozenset()
    sentiment_lexicon: dict[str, float] = field(default_factory=dict)
    news_domains: frozenset[str] = frozenset()
    unparseable_urls: int = 0

    def rank(self, domain: str | None) -> float:
        return self.domain_rank.get(domain, UNKNOWN_RANK) if domain else UNKNOWN_RANK

    def is_news(self, domain: str | None) -> bool:
        return bool(domain) and self.domain_category.get(domain, "non_news") == "news"

    def wot(self, domain: str | None) -> float:
        return self.wot_score.get(domain, NEUTRAL_WOT) if domain else NEUTRAL_WOT

    def in_large_city(self, location: str | None) -> bool:
        if not location:
            return False
        norm = " ".join(location.lower().split())
        return any(city in norm for city in self.large_cities)


def _rows(text: str, path: str, ncols: int) -> list[list[str]]:
    out = []
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if ncols > 1 else [line]
        if len(parts) != ncols:
            raise TableError(f"{path}:{no}: expected {ncols} tab-separated columns")
        out.append([p.strip() for p in parts])
    return out


def _read(directory: Path | None, name: str) -> tuple[str, str]:
    if directory is None:
        ref = resources.files("earlyrumor") / "data" / name
        return ref.read_text(encoding="utf-8"), f"<bundled>/{name}"
    path = Path(directory) / name
    if not path.is_file():
        raise TableError(f"missing lookup table {path}")
    return path.read_text(encoding="utf-8"), str(path)


def load_tables(directory: str | Path | None = None) -> LookupTables:
    """Load all tables from ``directory`` (file names as in ``TABLE_FILES``); bundled copies by default."""
    d = None if directory is None else Path(directory)
    tables = LookupTables()
    text, src = _read(d, TABLE_FILES["domain_rank"])
    for dom, rank in _rows(text, src, 2):
        tables.domain_rank[dom.lower()] = int(rank)
    text, src = _read(d, TABLE_FILES["domain_category"])
    for dom, cat in _rows(text, src, 2):
        if cat not in ("news", "non_news"):
            raise TableError(f"{src}: bad category {cat!r} for {dom}")
        tables.domain_category[dom.lower()] = cat
    text, src = _read(d, TABLE_FILES["wot_score"])
    for dom, score in _rows(text, src, 2):
        value = float(score)
        if not 0.0 <= value <= 100.0:
            raise TableError(f"{src}: WOT score out of [0,100] for {dom}")
        tables.wot_score[dom.lower()] = value
    text, src = _read(d, TABLE_FILES["large_cities"])
    tables.large_cities = frozenset(" ".join(r[0].lower().split()) for r in _rows(text, src, 1))
    text, src = _read(d, TABLE_FILES["sentiment_lexicon"])
    lex = {}
    for tok, pol in _rows(text, src, 2):
        value = float(pol)
        if not -1.0 <= value <= 1.0:
            raise TableError(f"{src}: polarity out of [-1,1] for {tok}")
        lex[tok.lower()] = value
    tables.sentiment_lexicon = lex
    text, src = _read(d, TABLE_FILES["news_domains"])
    tables.news_domains = frozenset(r[0].lower() for r in _rows(text, src, 1))
    return tables


def registrable_domain(url: str) -> str | None:
    """Lower-cased registrable host of an absolute URL, or ``None`` if unparseable.

    Without a public-suffix list, the rule is: the last two labels, or the
    last three when the second-to-last is a generic second-level label
    (``bbc.co.uk`` keeps three labels, ``news.bbc.com`` becomes ``bbc.com``).
    """
    try:
        parts = urlsplit(url.strip())
        host = parts.hostname
    except ValueError:
        return None
    if not parts.scheme or not host or "." not in host:
        return None
    labels = [lab for lab in host.lower().rstrip(".").split(".") if lab]
    if len(labels) < 2:
        return None
    if len(labels) >= 3 and labels[-2] in _SECOND_LEVEL and len(labels[-1]) == 2:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def classify_url(url: str, tables: LookupTables) -> tuple[bool, bool, float]:
    """Return ``(is_news, rank_lt_5000, wot)`` for a URL.

    Unknown or unparseable domains get the defaults (non-news, unranked,
    neutral 50); unparseable URLs are counted in ``tables.unparseable_urls``.
    """
    domain = registrable_domain(url)
    if domain is None:
        tables.unparseable_urls += 1
    return tables.is_news(domain), tables.rank(domain) < RANK_CUTOFF, tables.wot(domain)
