"""Tweet records, labelled events, burst-window selection and hourly bucketing."""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator, Sequence

LABELS = ("rumor", "news")
HOUR = timedelta(hours=1)
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class ParseError(ValueError):
    """A line is not valid JSON."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(where + message)


class SchemaError(ValueError):
    """A record lacks a required field or has a field of the wrong type."""

    def __init__(self, field_name: str, message: str = "missing required field",
                 line_no: int | None = None):
        self.field = field_name
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message} {field_name!r}")


class EmptyEventError(ValueError):
    """An event has no tweets to window."""


@dataclass(frozen=True)
class UserProfile:
    followers_count: int = 0
    friends_count: int = 0
    statuses_count: int = 0
    photos_count: int = 0
    verified: bool = False
    has_description: bool = False
    location: str | None = None
    join_date: datetime | None = None


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    created_at: datetime
    author: UserProfile = field(default_factory=UserProfile)
    is_retweet: bool = False
    retweet_count: int = 0
    urls: tuple[str, ...] = ()
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    event_id: str | None = None


@dataclass
class Event:
    event_id: str
    label: str
    tweets: list[Tweet]

    def __post_init__(self):
        if self.label not in LABELS:
            raise SchemaError("label", f"label must be one of {LABELS} for")
        if not self.tweets:
            raise EmptyEventError(f"event {self.event_id} has no tweets")

    @property
    def y(self) -> int:
        """Classifier target: rumor = 1, news = 0."""
        return 1 if self.label == "rumor" else 0


@dataclass(frozen=True)
class EventWindow:
    t_max: datetime
    t_0: datetime
    t_end: datetime
    interval_length: timedelta = HOUR
    n_intervals: int = 48

    def interval_start(self, index: int) -> datetime:
        return self.t_0 + index * self.interval_length


@dataclass
class IntervalBucket:
    index: int
    tweets: list[Tweet]
    start: datetime | None = None


@dataclass(frozen=True)
class DropReport:
    event_id: str
    dropped_count: int

    def to_json(self) -> str:
        return json.dumps({"event_id": self.event_id, "dropped_count": self.dropped_count},
                          sort_keys=True)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_timestamp(value) -> datetime:
    """ISO-8601 text (``Z`` suffix allowed) or epoch seconds to an aware UTC datetime."""
    if isinstance(value, datetime):
        ts = value
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        ts = datetime.fromtimestamp(float(value), tz=timezone.utc)
    elif isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    else:
        raise ValueError(f"unsupported timestamp {value!r}")
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ").replace(".000000Z", "Z")


def _count(raw: dict, key: str, line_no) -> int:
    value = raw.get(key, 0)
    if value is None:
        return 0
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise SchemaError(key, "expected a non-negative count for", line_no)
    return int(value)


def _str_list(raw: dict, key: str, line_no) -> tuple[str, ...]:
    value = raw.get(key)
    if value is None:
        return ()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(key, "expected a list of strings for", line_no)
    return tuple(value)


def _parse_user(raw, line_no) -> UserProfile:
    if raw is None:
        return UserProfile()
    if not isinstance(raw, dict):
        raise SchemaError("user", "expected an object for", line_no)
    desc = raw.get("description")
    join = raw.get("join_date")
    try:
        join_ts = parse_timestamp(join) if join not in (None, "") else None
    except ValueError as exc:
        raise SchemaError("user.join_date", f"unparseable timestamp ({exc}) in", line_no) from None
    location = raw.get("location")
    return UserProfile(
        followers_count=_count(raw, "followers", line_no),
        friends_count=_count(raw, "friends", line_no),
        statuses_count=_count(raw, "statuses", line_no),
        photos_count=_count(raw, "photos", line_no),
        verified=bool(raw.get("verified", False)),
        has_description=bool(desc.strip()) if isinstance(desc, str) else bool(desc),
        location=location if isinstance(location, str) and location else None,
        join_date=join_ts,
    )


def parse_tweet_record(line: str, line_no: int | None = None) -> Tweet:
    """Map one JSON line of ``tweets.jsonl`` to a :class:`Tweet`.

    ``id``, ``text`` and ``created_at`` are required; list fields default to
    empty, flags to false, counts to zero and the user profile to all-default.
    """
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", line_no) from None
    if not isinstance(raw, dict):
        raise ParseError("record is not a JSON object", line_no)
    for key in ("id", "text", "created_at"):
        if raw.get(key) is None:
            raise SchemaError(key, line_no=line_no)
    if not isinstance(raw["text"], str):
        raise SchemaError("text", "expected a string for", line_no)
    try:
        created = parse_timestamp(raw["created_at"])
    except (ValueError, OverflowError) as exc:
        raise SchemaError("created_at", f"unparseable timestamp ({exc}) in", line_no) from None
    event_id = raw.get("event_id")
    return Tweet(
        id=str(raw["id"]),
        text=raw["text"],
        created_at=created,
        author=_parse_user(raw.get("user"), line_no),
        is_retweet=bool(raw.get("is_retweet", False)),
        retweet_count=_count(raw, "retweet_count", line_no),
        urls=_str_list(raw, "urls", line_no),
        hashtags=_str_list(raw, "hashtags", line_no),
        mentions=_str_list(raw, "mentions", line_no),
        event_id=None if event_id is None else str(event_id),
    )


def tweet_to_record(tweet: Tweet) -> dict:
    """Inverse of :func:`parse_tweet_record` (used by the synthetic generator)."""
    u = tweet.author
    return {
        "id": tweet.id,
        "event_id": tweet.event_id,
        "text": tweet.text,
        "created_at": format_timestamp(tweet.created_at),
        "is_retweet": tweet.is_retweet,
        "retweet_count": tweet.retweet_count,
        "urls": list(tweet.urls),
        "hashtags": list(tweet.hashtags),
        "mentions": list(tweet.mentions),
        "user": {
            "followers": u.followers_count,
            "friends": u.friends_count,
            "statuses": u.statuses_count,
            "photos": u.photos_count,
            "verified": u.verified,
            "description": u.has_description,
            "location": u.location,
            "join_date": None if u.join_date is None else format_timestamp(u.join_date),
        },
    }


def read_tweets_jsonl(path: str | Path) -> Iterator[Tweet]:
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if line.strip():
                yield parse_tweet_record(line, no)


def read_events_csv(path: str | Path) -> dict[str, str]:
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"event_id", "label"} <= set(reader.fieldnames):
            raise SchemaError("event_id,label", "events.csv header must contain")
        for no, row in enumerate(reader, start=2):
            label = (row["label"] or "").strip().lower()
            if label not in LABELS:
                raise SchemaError("label", f"unknown label {row['label']!r} in", no)
            labels[row["event_id"].strip()] = label
    return labels


def assemble_events(tweets: Iterable[Tweet], labels: dict[str, str]) -> list[Event]:
    """Group tweets by ``event_id``; events are sorted by id, tweets by (time, id).

    Tweets whose event is not labelled are ignored; labelled events with no
    tweets raise :class:`EmptyEventError`.
    """
    grouped: dict[str, list[Tweet]] = {eid: [] for eid in labels}
    seen: set[str] = set()
    for tw in tweets:
        if tw.event_id is None:
            raise SchemaError("event_id", line_no=None)
        if tw.event_id not in grouped:
            continue
        if tw.id in seen:
            raise SchemaError("id", f"duplicate tweet id {tw.id!r}:")
        seen.add(tw.id)
        grouped[tw.event_id].append(tw)
    events = []
    for eid in sorted(grouped):
        tws = sorted(grouped[eid], key=lambda t: (t.created_at, t.id))
        events.append(Event(eid, labels[eid], tws))
    return events


def load_events(tweets_path: str | Path, events_path: str | Path) -> list[Event]:
    return assemble_events(read_tweets_jsonl(tweets_path), read_events_csv(events_path))


# ---------------------------------------------------------------------------
# windowing
# ---------------------------------------------------------------------------

def _hour_floor(ts: datetime) -> datetime:
    return _EPOCH + ((ts - _EPOCH) // HOUR) * HOUR


def select_event_window(timestamps: Sequence[datetime], n_intervals: int = 48,
                        interval_length: timedelta = HOUR) -> EventWindow:
    """Pick the observation window around the busiest hour.

    ``t_max`` is the UTC hour with the most tweets (earliest on ties). ``t_0``
    is the earliest tweet that still lets the window ``[t_0, t_0 + n*len)``
    contain the whole peak hour, i.e. the first tweet in
    ``[t_max + 1h - n*len, t_max + 1h)``.
    """
    if not timestamps:
        raise EmptyEventError("cannot window an event without tweets")
    if n_intervals < 1:
        raise ValueError("n_intervals must be >= 1")
    span = n_intervals * interval_length
    if span < HOUR:
        raise ValueError("window must span at least one hour")
    counts = Counter(_hour_floor(ts) for ts in timestamps)
    best = max(counts.values())
    t_max = min(h for h, c in counts.items() if c == best)
    lo = t_max + HOUR - span
    hi = t_max + HOUR
    t_0 = min(ts for ts in timestamps if lo <= ts < hi)
    return EventWindow(t_max=t_max, t_0=t_0, t_end=t_0 + span,
                       interval_length=interval_length, n_intervals=n_intervals)


def bucket_tweets(event: Event, window: EventWindow) -> tuple[list[IntervalBucket], DropReport]:
    """Assign tweets to half-open intervals ``[t_0 + i*len, t_0 + (i+1)*len)``.

    Tweets outside ``[t_0, t_end)`` are dropped and counted.
    """
    buckets = [IntervalBucket(i, [], window.interval_start(i)) for i in range(window.n_intervals)]
    dropped = 0
    for tw in event.tweets:
        if tw.created_at < window.t_0 or tw.created_at >= window.t_end:
            dropped += 1
            continue
        idx = (tw.created_at - window.t_0) // window.interval_length
        buckets[idx].tweets.append(tw)
    return buckets, DropReport(event.event_id, dropped)


def window_event(event: Event, n_intervals: int = 48,
                 interval_length: timedelta = HOUR) -> tuple[EventWindow, list[IntervalBucket], DropReport]:
    window = select_event_window([t.created_at for t in event.tweets], n_intervals, interval_length)
    buckets, report = bucket_tweets(event, window)
    return window, buckets, report
