"""Naive single-pass recomputations of the interval feature blocks, written
independently of the package code and used as test oracles."""
from __future__ import annotations

import unicodedata
from urllib.parse import urlsplit

SMILEYS = [":->", ":-)", ";->", ";-)", ":)", ";)"]
SADS = [":-<", ":-(", ";-<", ";-(", ":(", ";("]
PRON_I = {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "i'm",
          "i've", "i'll", "i'd", "we're", "we've"}
PRON_YOU = {"u", "you", "your", "yours", "yourself", "yourselves", "ur", "you're", "you've", "ya"}
PRON_HE = {"he", "she", "they", "him", "her", "his", "hers", "them", "their", "theirs",
           "himself", "herself", "themselves", "he's", "she's", "they're"}
SLD = {"co", "com", "net", "org", "gov", "ac", "edu", "go", "ne", "or"}


def words(text):
    out = []
    for w in text.lower().split():
        punct = "".join(c for c in set(w) if unicodedata.category(c)[0] == "P")
        w = w.strip(punct)
        if w:
            out.append(w)
    return out


def text_block(texts, lexicon):
    n = len(texts)
    if n == 0:
        return [0.0] * 16
    acc = [0.0] * 16
    for text in texts:
        ws = words(text)
        letters = [c for c in text if c.isalpha()]
        pol = [lexicon[w] if w in lexicon else 0.0 for w in ws]
        acc[0] += len(text)
        acc[1] += len(set(text))
        acc[2] += (sum(c.isupper() for c in letters) / len(letters)) if letters else 0.0
        acc[3] += any(s in text for s in SMILEYS)
        acc[4] += any(s in text for s in SADS)
        acc[5] += len([p for p in pol if p > 0])
        acc[6] += len([p for p in pol if p < 0])
        acc[7] += (sum(pol) / len(pol)) if pol else 0.0
        acc[8] += "via" in ws
        acc[9] += "$" in text
        acc[10] += "?" in text
        acc[11] += "!" in text
        acc[12] += ("??" in text) or ("!!" in text) or ("?!" in text) or ("!?" in text)
        acc[13] += any(w in PRON_I for w in ws)
        acc[14] += any(w in PRON_YOU for w in ws)
        acc[15] += any(w in PRON_HE for w in ws)
    return [a / n for a in acc]


def domain_of(url):
    try:
        parts = urlsplit(url.strip())
        host = parts.hostname
    except ValueError:
        return None
    if not parts.scheme or not host or "." not in host:
        return None
    labels = [x for x in host.lower().rstrip(".").split(".") if x]
    if len(labels) < 2:
        return None
    keep = 3 if len(labels) >= 3 and labels[-2] in SLD and len(labels[-1]) == 2 else 2
    return ".".join(labels[-keep:])


def twitter_block(tweets, tables):
    n = len(tweets)
    wots = []
    acc = [0.0] * 9
    for tw in tweets:
        doms = [domain_of(u) for u in tw.urls]
        acc[0] += len(tw.hashtags) > 0
        acc[1] += len(tw.mentions) > 0
        acc[2] += len(tw.urls)
        acc[3] += tw.retweet_count
        acc[4] += tw.is_retweet
        acc[5] += any(d is not None and tables.domain_category.get(d) == "news" for d in doms)
        acc[7] += any(d is not None and tables.domain_rank.get(d, float("inf")) < 5000 for d in doms)
        acc[8] += any(d is not None and d in tables.news_domains for d in doms)
        wots += [tables.wot_score.get(d, 50.0) if d is not None else 50.0 for d in doms]
    out = [a / n for a in acc] if n else [0.0] * 9
    out[6] = sum(wots) / len(wots) if wots else 50.0
    return out


def user_block(tweets, tables):
    n = len(tweets)
    if n == 0:
        return [0.0] * 9
    acc = [0.0] * 9
    for tw in tweets:
        u = tw.author
        acc[0] += u.followers_count
        acc[1] += u.friends_count
        acc[2] += u.statuses_count
        acc[3] += u.photos_count
        loc = " ".join((u.location or "").lower().split())
        acc[4] += bool(u.location) and any(c in loc for c in tables.large_cities)
        if u.join_date is not None:
            acc[5] += max(0.0, (tw.created_at - u.join_date).total_seconds() / 86400.0)
        acc[6] += u.has_description
        acc[7] += u.verified
        total = u.followers_count + u.friends_count
        acc[8] += u.friends_count / total if total else 0.0
    return [a / n for a in acc]
