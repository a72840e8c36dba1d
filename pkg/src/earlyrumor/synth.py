"""Seeded synthetic rumor/news corpus: tweets.jsonl, events.csv, labeled_tweets.csv and a
ground-truth sidecar with the diffusion parameters behind every event."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

from .epi import (
    NumericError,
    SeizParams,
    SisParams,
    SpikeMParams,
    simulate_seiz,
    simulate_sis,
    simulate_spikem,
)
from .ingestion import LABELS, Tweet, UserProfile, parse_timestamp, tweet_to_record

MODELS = ("SIS", "SEIZ", "SpikeM")
_CLASS_KEYS = (
    "models", "cue_rate", "cross_cue_rate", "debunk_rate", "positive_rate", "negative_rate",
    "question_rate", "exclamation_rate", "double_mark_rate", "smile_rate", "sad_rate",
    "caps_rate", "pronoun_rate", "via_rate", "stock_rate", "hashtag_rate", "mention_rate",
    "retweet_rate", "retweet_count_mean", "url_rate", "url_mix", "followers_lognormal",
    "friends_lognormal", "statuses_lognormal", "photos_mean", "verified_rate",
    "description_rate", "city_rate", "account_age_days", "background_tweets",
)


class SynthSpecError(ValueError):
    """The synthetic-corpus spec is missing a field or holds an invalid value."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class SynthSpec:
    raw: dict

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def n_events_per_class(self) -> int:
        return int(self.raw["n_events_per_class"])

    @property
    def n_intervals(self) -> int:
        return int(self.raw["n_intervals"])

    def with_overrides(self, **kw) -> "SynthSpec":
        raw = json.loads(json.dumps(self.raw))
        raw.update({k: v for k, v in kw.items() if v is not None})
        return validate_spec(raw)


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise SynthSpecError(f"{path}{key}", "missing")
    return obj[key]


def _check_rate(value, path: str) -> None:
    vals = value if isinstance(value, list) else [value]
    if not vals or not all(isinstance(v, (int, float)) and 0.0 <= v <= 1.0 for v in vals):
        raise SynthSpecError(path, "rates must lie in [0, 1]")


def _check_range(value, path: str) -> None:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value) or value[0] > value[1]):
        raise SynthSpecError(path, "expected [lo, hi] with lo <= hi")


def validate_spec(raw: dict) -> SynthSpec:
    """Check every field the generator reads; errors name the offending field."""
    for key in ("seed", "n_events_per_class", "n_intervals", "start", "span_days",
                "pretrain_tweets", "volume", "early_floor", "models", "lexicon", "domains",
                "small_towns", "classes"):
        _need(raw, key, "")
    if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool) or raw["seed"] < 0:
        raise SynthSpecError("seed", "must be a non-negative integer")
    if not isinstance(raw["n_events_per_class"], int) or raw["n_events_per_class"] < 1:
        raise SynthSpecError("n_events_per_class", "must be a positive integer")
    if not isinstance(raw["n_intervals"], int) or raw["n_intervals"] < 2:
        raise SynthSpecError("n_intervals", "must be an integer >= 2")
    if not isinstance(raw.get("pipeline", {}), dict):
        raise SynthSpecError("pipeline", "must be an object of run settings")
    if not isinstance(raw["pretrain_tweets"], int) or raw["pretrain_tweets"] < 2:
        raise SynthSpecError("pretrain_tweets", "must be an integer >= 2")
    try:
        parse_timestamp(raw["start"])
    except ValueError:
        raise SynthSpecError("start", "not an ISO-8601 timestamp") from None
    _check_rate(_need(raw["early_floor"], "share", "early_floor."), "early_floor.share")
    for m in MODELS:
        for name, rng_ in _need(raw["models"], m, "models.").items():
            if name not in ("doc", "z0"):
                _check_range(rng_, f"models.{m}.{name}")
    lex = raw["lexicon"]
    for key in ("filler", "topics", "positive", "negative", "debunk", "smile", "sad"):
        if not _need(lex, key, "lexicon."):
            raise SynthSpecError(f"lexicon.{key}", "must be non-empty")
    for label in LABELS:
        _check_range(_need(raw["volume"], label, "volume."), f"volume.{label}")
        if not _need(_need(lex, "cues", "lexicon."), label, "lexicon.cues."):
            raise SynthSpecError(f"lexicon.cues.{label}", "must be non-empty")
        cls = _need(raw["classes"], label, "classes.")
        path = f"classes.{label}."
        for key in _CLASS_KEYS:
            _need(cls, key, path)
        probs = cls["models"]
        if set(probs) - set(MODELS) or not math.isclose(sum(probs.values()), 1.0):
            raise SynthSpecError(path + "models", f"weights over {MODELS} must sum to 1")
        for key in ("cue_rate", "cross_cue_rate", "debunk_rate", "positive_rate", "negative_rate",
                    "question_rate", "exclamation_rate", "double_mark_rate", "smile_rate",
                    "sad_rate", "caps_rate", "via_rate", "stock_rate", "hashtag_rate",
                    "mention_rate", "retweet_rate", "url_rate", "verified_rate",
                    "description_rate", "city_rate"):
            _check_rate(cls[key], path + key)
        mix = cls["url_mix"]
        if set(mix) != {"news", "lowrep", "social"} or not math.isclose(sum(mix.values()), 1.0):
            raise SynthSpecError(path + "url_mix", "news/lowrep/social weights must sum to 1")
        _check_range(cls["account_age_days"], path + "account_age_days")
    return SynthSpec(raw)


def load_spec(path: str | Path | None = None) -> SynthSpec:
    """Read a spec file; the bundled 200-event benchmark spec by default."""
    if path is None:
        text = (resources.files("earlyrumor") / "data" / "synth_default.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SynthSpecError("<file>", f"invalid JSON ({exc.msg})") from None
    return validate_spec(raw)


# ---------------------------------------------------------------------------
# volume curves
# ---------------------------------------------------------------------------

def _uniform(rng: np.random.Generator, bounds) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def sample_curve(model: str, ranges: dict, population: float, steps: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    """Simulated per-hour volume and the parameters that produced it."""
    if model == "SIS":
        p = SisParams(_uniform(rng, ranges["beta"]), _uniform(rng, ranges["alpha"]), population)
        return simulate_sis(p, steps), {"beta": p.beta, "alpha": p.alpha}
    if model == "SEIZ":
        names = ("beta", "b", "l", "p", "epsilon", "rho")
        vals = {n: _uniform(rng, ranges[n]) for n in names}
        z0 = float(ranges.get("z0", 1.0))
        curve = simulate_seiz(SeizParams(**vals, population=population), steps, z0=z0)
        return curve, {**vals, "z0": z0}
    vals = {n: _uniform(rng, ranges[n]) for n in ("beta_n", "shock", "epsilon", "period_p",
                                                  "amp_p", "shift_p", "period_q", "amp_q",
                                                  "shift_q")}
    start = int(rng.integers(int(ranges["start"][0]), int(ranges["start"][1]) + 1))
    p = SpikeMParams(vals["beta_n"] / population, vals["shock"], vals["epsilon"],
                     vals["period_p"], vals["amp_p"], vals["shift_p"], vals["period_q"],
                     vals["amp_q"], vals["shift_q"], population, start)
    return simulate_spikem(p, steps), {**vals, "start": start}


# ---------------------------------------------------------------------------
# tweets
# ---------------------------------------------------------------------------

def _ramp(rate, frac: float) -> float:
    if isinstance(rate, list):
        return rate[0] + (rate[1] - rate[0]) * frac
    return rate


class _TweetFactory:
    def __init__(self, spec: SynthSpec, cities: list[str]):
        self.raw = spec.raw
        self.lex = spec.raw["lexicon"]
        self.cities = cities
        self.n = spec.n_intervals

    def text(self, label: str, topics: list[str], hour: float, rng) -> str:
        cls = self.raw["classes"][label]
        lex = self.lex
        other = "news" if label == "rumor" else "rumor"
        pick = lambda pool: pool[int(rng.integers(len(pool)))]  # noqa: E731
        tokens = [pick(lex["filler"]) for _ in range(int(rng.integers(3, 9)))]
        tokens += [topics[int(rng.integers(len(topics)))] for _ in range(int(rng.integers(1, 3)))]
        if rng.random() < cls["cue_rate"]:
            tokens.append(pick(lex["cues"][label]))
        if rng.random() < cls["cross_cue_rate"]:
            tokens.append(pick(lex["cues"][other]))
        if rng.random() < cls["positive_rate"]:
            tokens.append(pick(lex["positive"]))
        if rng.random() < cls["negative_rate"]:
            tokens.append(pick(lex["negative"]))
        if rng.random() < _ramp(cls["debunk_rate"], hour / self.n):
            tokens.append(pick(lex["debunk"]))
        for case, words in lex["pronouns"].items():
            if rng.random() < cls["pronoun_rate"][case]:
                tokens.append(pick(words))
        order = rng.permutation(len(tokens))
        tokens = [tokens[i] for i in order]
        if rng.random() < cls["caps_rate"]:
            j = int(rng.integers(len(tokens)))
            tokens[j] = tokens[j].upper()
        if rng.random() < cls["via_rate"]:
            tokens += ["via", f"@{pick(topics)}desk"]
        if rng.random() < cls["stock_rate"]:
            tokens.append(f"${pick(topics)[:4].upper()}")
        text = " ".join(tokens)
        if rng.random() < cls["double_mark_rate"]:
            text += pick(["??", "!!", "?!"])
        else:
            if rng.random() < cls["question_rate"]:
                text += "?"
            if rng.random() < cls["exclamation_rate"]:
                text += "!"
        if rng.random() < cls["smile_rate"]:
            text += " " + pick(lex["smile"])
        if rng.random() < cls["sad_rate"]:
            text += " " + pick(lex["sad"])
        return text[:1].upper() + text[1:]

    def url(self, label: str, rng) -> str:
        mix = self.raw["classes"][label]["url_mix"]
        kinds = ["news", "lowrep", "social"]
        kind = kinds[int(rng.choice(3, p=[mix[k] for k in kinds]))]
        pool = self.raw["domains"][kind]
        domain = pool[int(rng.integers(len(pool)))]
        sub = "www." if rng.random() < 0.5 else ""
        return f"https://{sub}{domain}/{int(rng.integers(10**6, 10**7))}"

    def user(self, label: str, at: datetime, rng) -> UserProfile:
        cls = self.raw["classes"][label]
        lognorm = lambda key: int(rng.lognormal(*cls[key]))  # noqa: E731
        if rng.random() < cls["city_rate"]:
            loc = self.cities[int(rng.integers(len(self.cities)))].title()
        elif rng.random() < 0.5:
            towns = self.raw["small_towns"]
            loc = towns[int(rng.integers(len(towns)))].title()
        else:
            loc = None
        age = timedelta(days=float(rng.uniform(*cls["account_age_days"])))
        return UserProfile(
            followers_count=lognorm("followers_lognormal"),
            friends_count=lognorm("friends_lognormal"),
            statuses_count=lognorm("statuses_lognormal"),
            photos_count=int(rng.poisson(cls["photos_mean"])),
            verified=bool(rng.random() < cls["verified_rate"]),
            has_description=bool(rng.random() < cls["description_rate"]),
            location=loc,
            join_date=(at - age).replace(microsecond=0),
        )

    def tweet(self, tid: str, event_id: str, label: str, topics: list[str], at: datetime,
              hour: float, rng) -> Tweet:
        cls = self.raw["classes"][label]
        text = self.text(label, topics, hour, rng)
        is_rt = bool(rng.random() < cls["retweet_rate"])
        if is_rt:
            text = f"RT @user{int(rng.integers(10**5))}: {text}"
        hashtags = (f"#{topics[0]}",) if rng.random() < cls["hashtag_rate"] else ()
        mentions = (f"@user{int(rng.integers(10**5))}",) if rng.random() < cls["mention_rate"] else ()
        urls = (self.url(label, rng),) if rng.random() < cls["url_rate"] else ()
        text = " ".join([text, *hashtags, *mentions, *urls])
        return Tweet(id=tid, text=text, created_at=at, author=self.user(label, at, rng),
                     is_retweet=is_rt, retweet_count=int(rng.poisson(cls["retweet_count_mean"])),
                     urls=urls, hashtags=hashtags, mentions=mentions, event_id=event_id)


def _bundled_cities() -> list[str]:
    text = (resources.files("earlyrumor") / "data" / "cities.txt").read_text("utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


@dataclass
class SynthCorpus:
    tweets: list[Tweet]
    labels: dict[str, str]
    truth: dict[str, dict]
    pretrain: list[tuple[str, str]]


def generate_synthetic_corpus(spec: SynthSpec) -> SynthCorpus:
    """Build the corpus in memory; identical spec (seed included) gives identical output."""
    raw = spec.raw
    factory = _TweetFactory(spec, _bundled_cities())
    origin = parse_timestamp(raw["start"])
    n = spec.n_intervals
    share = float(raw["early_floor"]["share"])
    tweets: list[Tweet] = []
    labels: dict[str, str] = {}
    truth: dict[str, dict] = {}
    root = np.random.SeedSequence(spec.seed)
    event_seeds = root.spawn(2 * spec.n_events_per_class + 1)
    for idx in range(2 * spec.n_events_per_class):
        label = LABELS[idx % 2]
        rng = np.random.default_rng(event_seeds[idx])
        eid = f"E{idx:04d}"
        cls = raw["classes"][label]
        names = sorted(cls["models"])
        model = names[int(rng.choice(len(names), p=[cls["models"][m] for m in names]))]
        volume = _uniform(rng, raw["volume"][label])
        population = 10.0 * volume
        for _ in range(20):
            try:
                curve, params = sample_curve(model, raw["models"][model], population, n, rng)
            except NumericError:
                continue
            if curve.sum() > 0:
                break
        else:
            raise SynthSpecError(f"models.{model}", "ranges never produced a usable curve")
        expected = curve / curve.sum() * volume
        expected = (1.0 - share) * expected + share * volume / n
        counts = rng.poisson(expected)
        counts[int(np.argmax(expected))] += 1   # never an empty event
        topics = list(rng.choice(raw["lexicon"]["topics"], size=3, replace=False))
        t_start = origin + timedelta(hours=int(rng.integers(0, 24 * int(raw["span_days"]))))
        k = 0
        bg = cls["background_tweets"]
        if rng.random() < bg["rate"]:
            for _ in range(int(rng.integers(bg["count"][0], bg["count"][1] + 1))):
                back = timedelta(days=float(rng.uniform(*bg["days_before"])))
                at = (t_start - back).replace(microsecond=0)
                tweets.append(factory.tweet(f"{eid}-{k:05d}", eid, label, topics, at, 0.0, rng))
                k += 1
        for hour, c in enumerate(counts):
            for sec in np.sort(rng.integers(0, 3600, size=int(c))):
                at = t_start + timedelta(hours=hour, seconds=int(sec))
                tweets.append(factory.tweet(f"{eid}-{k:05d}", eid, label, topics, at,
                                            hour + sec / 3600.0, rng))
                k += 1
        labels[eid] = label
        truth[eid] = {"label": label, "model": model, "params": params,
                      "population": population, "volume": volume,
                      "expected": [float(x) for x in expected],
                      "counts": [int(x) for x in counts], "start": t_start.isoformat()}
    rng = np.random.default_rng(event_seeds[-1])
    pretrain = []
    for j in range(int(raw["pretrain_tweets"])):
        label = LABELS[j % 2]
        topics = list(rng.choice(raw["lexicon"]["topics"], size=3, replace=False))
        pretrain.append((factory.text(label, topics, float(rng.uniform(0, n)), rng), label))
    return SynthCorpus(tweets, labels, truth, pretrain)


def write_corpus(corpus: SynthCorpus, out_dir: str | Path,
                 spec: SynthSpec | None = None) -> dict[str, Path]:
    """Write tweets.jsonl, events.csv, labeled_tweets.csv, ground_truth.json and a
    config.json that runs the pipeline on them (settings from the spec's ``pipeline``)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in
             ("tweets.jsonl", "events.csv", "labeled_tweets.csv", "ground_truth.json",
              "config.json")}
    settings = {k: v for k, v in (spec.raw.get("pipeline", {}) if spec else {}).items()
                if k != "doc"}
    config = {"tweets": "tweets.jsonl", "events": "events.csv",
              "labeled_tweets": "labeled_tweets.csv", **settings}
    if spec is not None:
        config.setdefault("n_intervals", spec.n_intervals)
    paths["config.json"].write_text(json.dumps(config, sort_keys=True, indent=1) + "\n",
                                    encoding="utf-8")
    with open(paths["tweets.jsonl"], "w", encoding="utf-8", newline="\n") as fh:
        for tw in corpus.tweets:
            fh.write(json.dumps(tweet_to_record(tw), sort_keys=True, ensure_ascii=False) + "\n")
    with open(paths["events.csv"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["event_id", "label"])
        for eid in sorted(corpus.labels):
            w.writerow([eid, corpus.labels[eid]])
    with open(paths["labeled_tweets.csv"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["text", "label"])
        w.writerows(corpus.pretrain)
    paths["ground_truth.json"].write_text(json.dumps(corpus.truth, sort_keys=True, indent=1),
                                          encoding="utf-8")
    return paths


def read_labeled_tweets(path: str | Path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"text", "label"} <= set(reader.fieldnames):
            raise SynthSpecError("labeled_tweets.csv", "header must contain text,label")
        rows = [(r["text"], r["label"].strip().lower()) for r in reader]
    bad = [lab for _, lab in rows if lab not in LABELS]
    if bad:
        raise SynthSpecError("labeled_tweets.csv", f"unknown label {bad[0]!r}")
    return rows


def synthesize(spec: SynthSpec, out_dir: str | Path) -> dict[str, Path]:
    """Generate the corpus described by ``spec`` and write it to ``out_dir``."""
    return write_corpus(generate_synthetic_corpus(spec), out_dir, spec)
