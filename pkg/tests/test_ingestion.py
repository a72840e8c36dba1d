from __future__ import annotations

import json
from collections import Counter
from datetime import timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from earlyrumor.ingestion import (
    HOUR,
    EmptyEventError,
    Event,
    ParseError,
    SchemaError,
    assemble_events,
    bucket_tweets,
    parse_timestamp,
    parse_tweet_record,
    read_events_csv,
    select_event_window,
    tweet_to_record,
    window_event,
)

from conftest import T0, make_tweet


def test_parse_maps_fields():
    line = json.dumps({"id": "1", "text": "hi", "created_at": "2016-07-22T18:22:00Z",
                       "event_id": "E", "retweet_count": 3, "is_retweet": True,
                       "user": {"followers": 5, "friends": 2, "verified": True,
                                "description": "x", "location": "Paris",
                                "join_date": "2015-01-01T00:00:00Z"}})
    tw = parse_tweet_record(line)
    assert tw.id == "1" and tw.text == "hi" and tw.event_id == "E"
    assert tw.created_at == T0 + timedelta(minutes=22)
    assert tw.retweet_count == 3 and tw.is_retweet
    assert tw.author.followers_count == 5 and tw.author.verified and tw.author.has_description
    assert tw.author.location == "Paris"


def test_missing_created_at_names_field():
    with pytest.raises(SchemaError) as err:
        parse_tweet_record(json.dumps({"id": "1", "text": "hi"}), 7)
    assert err.value.field == "created_at" and err.value.line_no == 7


def test_absent_lists_default_empty():
    tw = parse_tweet_record('{"id":"1","text":"hi","created_at":"2016-07-22T18:22:00Z"}')
    assert tw.urls == () and tw.hashtags == () and tw.mentions == ()
    assert not tw.is_retweet and tw.author.join_date is None


def test_malformed_json_reports_line():
    with pytest.raises(ParseError) as err:
        parse_tweet_record("{not json", 12)
    assert err.value.line_no == 12 and "line 12" in str(err.value)


def test_negative_count_rejected():
    with pytest.raises(SchemaError):
        parse_tweet_record('{"id":"1","text":"a","created_at":0,"retweet_count":-1}')


def test_record_round_trip(user):
    tw = make_tweet(5, "RT wow #x", 61.5, author=user, urls=("http://a.com/x",),
                    hashtags=("#x",), is_retweet=True, retweet_count=4)
    tw = tw.__class__(**{**tw.__dict__, "created_at": tw.created_at.replace(microsecond=0)})
    assert parse_tweet_record(json.dumps(tweet_to_record(tw))) == tw


def test_window_peak_and_start():
    ts = [T0] * 2 + [T0 + 5 * HOUR] * 50 + [T0 + 9 * HOUR] * 3
    w = select_event_window(ts)
    assert w.t_max == T0 + 5 * HOUR and w.t_0 == T0 and w.t_end == T0 + 48 * HOUR


def test_window_single_tweet():
    w = select_event_window([T0 + timedelta(minutes=17)])
    assert w.t_max == T0 and w.t_0 == T0 + timedelta(minutes=17)
    assert w.t_end - w.t_0 == 48 * HOUR


def test_window_empty():
    with pytest.raises(EmptyEventError):
        select_event_window([])


hours = st.lists(st.integers(0, 200), min_size=1, max_size=60)


@given(hours, st.integers(1, 72))
def test_window_peak_matches_brute_force(hs, n):
    ts = [T0 + h * HOUR + timedelta(minutes=(7 * i) % 60) for i, h in enumerate(hs)]
    w = select_event_window(ts, n)
    counts = Counter(hs)
    best = max(counts.values())
    peak = min(h for h, c in counts.items() if c == best)
    assert w.t_max == T0 + peak * HOUR
    assert w.t_end - w.t_0 == n * HOUR
    assert w.t_0 <= w.t_max + HOUR and w.t_max < w.t_end
    inside = [t for t in ts if w.t_max + HOUR - n * HOUR <= t < w.t_max + HOUR]
    assert w.t_0 == min(inside)


def test_bucket_index_and_half_open_end():
    ev = Event("E1", "rumor", [make_tweet(0, minutes=0), make_tweet(1, minutes=90),
                               make_tweet(2, minutes=48 * 60)])
    w = select_event_window([t.created_at for t in ev.tweets[:2]])
    buckets, report = bucket_tweets(ev, w)
    assert len(buckets) == 48
    assert [t.id for t in buckets[1].tweets] == ["1"]
    assert report.dropped_count == 1 and json.loads(report.to_json())["dropped_count"] == 1


@given(st.lists(st.floats(-3000, 6000, allow_nan=False), min_size=1, max_size=300))
def test_buckets_partition_input(minutes):
    ev = Event("E", "news", [make_tweet(i, minutes=m) for i, m in enumerate(minutes)])
    w, buckets, report = window_event(ev)
    seen = [t.id for b in buckets for t in b.tweets]
    assert len(seen) == len(set(seen))
    assert len(seen) + report.dropped_count == len(minutes)
    for b in buckets:
        for t in b.tweets:
            assert w.t_0 + b.index * HOUR <= t.created_at < w.t_0 + (b.index + 1) * HOUR
    # re-windowing the kept tweets gives the same window
    kept = [t.created_at for b in buckets for t in b.tweets]
    assert select_event_window(kept) == w


def test_assemble_sorts_and_rejects_duplicates():
    tws = [make_tweet(2, minutes=5), make_tweet(1, minutes=1)]
    (ev,) = assemble_events(tws, {"E1": "rumor"})
    assert [t.id for t in ev.tweets] == ["1", "2"] and ev.y == 1
    with pytest.raises(SchemaError):
        assemble_events([make_tweet(1), make_tweet(1)], {"E1": "news"})
    with pytest.raises(EmptyEventError):
        assemble_events([], {"E1": "news"})


def test_events_csv_rejects_unknown_label(tmp_path):
    p = tmp_path / "events.csv"
    p.write_text("event_id,label\nE1,maybe\n")
    with pytest.raises(SchemaError):
        read_events_csv(p)


def test_parse_timestamp_forms():
    assert parse_timestamp("2016-07-22T18:00:00Z") == T0
    assert parse_timestamp(T0.timestamp()) == T0
