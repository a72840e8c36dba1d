from __future__ import annotations

import os
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import settings

from earlyrumor.ingestion import Tweet, UserProfile

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

T0 = datetime(2016, 7, 22, 18, 0, tzinfo=timezone.utc)
FIXTURES = Path(__file__).parent / "fixtures"
MINI = Path(str(resources.files("earlyrumor") / "data" / "mini"))


def make_tweet(i: int = 0, text: str = "hello", minutes: float = 0.0, **kw) -> Tweet:
    kw.setdefault("created_at", T0 + timedelta(minutes=minutes))
    kw.setdefault("event_id", "E1")
    return Tweet(id=str(i), text=text, **kw)


@pytest.fixture
def mini_dir() -> Path:
    return MINI


@dataclass
class MiniRun:
    out: Path
    exit_code: int
    seconds: float


@pytest.fixture(scope="session")
def mini_run(tmp_path_factory) -> MiniRun:
    """One end-to-end CLI run over the bundled mini corpus, shared by the suite."""
    from earlyrumor.cli import main

    out = tmp_path_factory.mktemp("mini") / "run"
    start = time.perf_counter()
    code = main(["run", "--config", str(MINI / "config.json"), "--out", str(out)])
    return MiniRun(out, code, time.perf_counter() - start)


@pytest.fixture
def user() -> UserProfile:
    return UserProfile(followers_count=300, friends_count=100, statuses_count=5000,
                       photos_count=12, verified=True, has_description=True,
                       location="New York, NY", join_date=T0 - timedelta(days=10))


def toy_corpus(n: int = 64, seed: int = 0) -> list[tuple[str, str]]:
    """Half rumor tweets led by a hoax cue, half news tweets led by a confirmation cue."""
    import random

    rnd = random.Random(seed)
    filler = ["the", "bridge", "mayor", "downtown", "fire", "people", "tonight", "station",
              "river", "police", "crowd", "storm", "school", "now", "near", "after"]
    rumor_cues = ["hoax", "fake", "rumor", "allegedly", "unverified"]
    news_cues = ["confirmed", "official", "statement", "reported", "announced"]
    out = []
    for i in range(n):
        cues, label = (rumor_cues, "rumor") if i % 2 == 0 else (news_cues, "news")
        words = [rnd.choice(cues)] + rnd.sample(filler, rnd.randint(3, 8))
        if rnd.random() < 0.5:
            words.insert(rnd.randint(1, len(words)), rnd.choice(cues))
        out.append((" ".join(words), label))
    return out


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
