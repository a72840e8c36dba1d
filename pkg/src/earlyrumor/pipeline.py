"""End-to-end orchestration: ingest, credibility scores, interval features, epidemic fits,
event vectors, cross-validated evaluation and importance, with every stage checkpointed
to CSV in the output directory."""
from __future__ import annotations

import base64
import csv
import hashlib
import json
import logging
import os
import platform
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from importlib import metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import (
    DEFAULT_HOURS,
    MODEL_KINDS,
    Dataset,
    FittedPipeline,
    ReportRow,
    best_set,
    cross_validate,
    fit_pipeline,
    forest_to_json,
    permutation_importance,
    svm_to_json,
)
from .classifier.evaluation import N_FOLDS, base_feature_groups, rank_importance
from .credibility import Hyper, load_model, save_model, score_texts, train_credibility
from .dsts import FEATURE_GROUPS, FRAME_FEATURES, EventFrames, build_dataset, group_columns
from .ensemble import ENSEMBLE_FEATURES, credit_score, crowd_wisdom, load_debunk_lexicon
from .epi import EPI_FEATURES, fallback_features, fit_epi_features
from .epi.models import SeizParams, simulate_seiz, simulate_sis, simulate_spikem
from .features import (
    TEXT_FEATURES,
    TWITTER_FEATURES,
    USER_FEATURES,
    extract_text_features,
    extract_twitter_features,
    extract_user_features,
    load_tables,
)
from .features.lookup import TABLE_FILES
from .ingestion import Event, IntervalBucket, format_timestamp, load_events, window_event
from .synth import read_labeled_tweets

log = logging.getLogger(__name__)

INTERVAL_FEATURES = TEXT_FEATURES + TWITTER_FEATURES + USER_FEATURES + ENSEMBLE_FEATURES
GROUP_NAMES = tuple(FEATURE_GROUPS) + ("BestSet", "All")
EPI_MODELS = ("SIS", "SEIZ", "SpikeM")
BEST_SET_SIZE = 9


class ConfigError(ValueError):
    """The run configuration is incomplete or points at missing files."""


class PipelineError(RuntimeError):
    """A stage failed; names the stage and, when known, the event."""

    def __init__(self, stage: str, event_id: str | None, cause: BaseException):
        self.stage, self.event_id, self.cause = stage, event_id, cause
        where = f" (event {event_id})" if event_id is not None else ""
        super().__init__(f"stage {stage!r} failed{where}: {cause}")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_PATH_FIELDS = ("tweets", "events", "labeled_tweets", "credibility_model", "tables_dir",
                "debunk_words")


@dataclass
class PipelineConfig:
    tweets: str
    events: str
    labeled_tweets: str | None = None      # training corpus for the credibility model
    credibility_model: str | None = None   # pre-trained model; skips training when set
    tables_dir: str | None = None          # lookup tables and sentiment lexicon; bundled by default
    debunk_words: str | None = None
    n_intervals: int = 48
    hours: tuple[int, ...] = DEFAULT_HOURS
    models: tuple[str, ...] = ("rf",)
    feature_groups: tuple[str, ...] = ("All",)
    seed: int = 0
    n_trees: int = 350
    svm_C: float = 3.0
    svm_gamma: float = 0.2
    n_folds: int = N_FOLDS
    importance_repeats: int = 5
    importance_hours: tuple[int, ...] | None = None   # default: every hour in ``hours``
    epi_starts: int = 5
    credibility: dict = field(default_factory=dict)   # overrides of the network settings

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("hours", "models", "feature_groups", "importance_hours"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def hash(self) -> str:
        """Digest of the settings with input paths replaced by their contents' digests,
        so a copied corpus hashes the same wherever it lives."""
        doc = self.to_dict()
        for key in _PATH_FIELDS:
            if doc[key] is not None:
                doc[key] = _input_digest(key, doc[key])
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @property
    def hyper(self) -> Hyper:
        return Hyper(**{"seed": self.seed, **self.credibility})


def _input_digest(key: str, value: str) -> str:
    path = Path(value)
    if key == "tables_dir":
        parts = [f"{name}:{_sha256(path / name)}" for name in sorted(TABLE_FILES.values())
                 if (path / name).is_file()]
        return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()
    return _sha256(path) if path.is_file() else f"missing:{path.name}"


def config_from_dict(raw: dict, base_dir: str | Path | None = None) -> PipelineConfig:
    """Build and validate a config; relative paths resolve against ``base_dir``."""
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key in ("tweets", "events"):
        if not raw.get(key):
            raise ConfigError(f"config needs {key!r}")
    kw = dict(raw)
    for key in _PATH_FIELDS:
        if kw.get(key) and base_dir is not None and not Path(kw[key]).is_absolute():
            kw[key] = str(Path(base_dir) / kw[key])
    for key in ("hours", "models", "feature_groups", "importance_hours"):
        if kw.get(key) is not None:
            kw[key] = tuple(kw[key])
    try:
        cfg = PipelineConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    validate_config(cfg)
    return cfg


def load_config(path: str | Path, **overrides) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(raw, path.parent)


def _need_file(path: str | None, what: str) -> None:
    if path is not None and not Path(path).is_file():
        raise ConfigError(f"{what} file {path} not found")


def validate_config(cfg: PipelineConfig) -> None:
    """Every check that can fail before compute starts."""
    _need_file(cfg.tweets, "tweets")
    _need_file(cfg.events, "events")
    _need_file(cfg.labeled_tweets, "labeled tweets")
    _need_file(cfg.credibility_model, "credibility model")
    _need_file(cfg.debunk_words, "debunk lexicon")
    if cfg.tables_dir is not None:
        for name in TABLE_FILES.values():
            _need_file(str(Path(cfg.tables_dir) / name), "lookup table / lexicon")
    if cfg.credibility_model is None and cfg.labeled_tweets is None:
        raise ConfigError("set either credibility_model or labeled_tweets")
    if not isinstance(cfg.n_intervals, int) or cfg.n_intervals < 2:
        raise ConfigError("n_intervals must be an integer >= 2")
    for key in ("hours", "importance_hours"):
        hours = getattr(cfg, key)
        if hours is None:
            continue
        if not hours or any(not isinstance(h, int) or not 1 <= h <= cfg.n_intervals for h in hours):
            raise ConfigError(f"{key} must be integers in [1, {cfg.n_intervals}]")
    bad = [m for m in cfg.models if m not in MODEL_KINDS]
    if bad or not cfg.models:
        raise ConfigError(f"models must be drawn from {MODEL_KINDS}")
    bad = [g for g in cfg.feature_groups if g not in GROUP_NAMES]
    if bad or not cfg.feature_groups:
        raise ConfigError(f"unknown feature groups {bad}; choose from {GROUP_NAMES}")
    if cfg.n_folds < 2 or cfg.n_trees < 1 or cfg.importance_repeats < 1 or cfg.epi_starts < 1:
        raise ConfigError("n_folds >= 2, n_trees, importance_repeats and epi_starts >= 1 required")
    try:
        cfg.hyper
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"credibility settings: {exc}") from None


# ---------------------------------------------------------------------------
# artifact io
# ---------------------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@contextmanager
def _artifact(path: Path):
    """Write to ``<path>.partial`` and rename on success; a failed stage leaves the partial file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        yield fh
    os.replace(tmp, path)


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def pipeline_to_json(pipe: FittedPipeline, *, hour: int, config_hash: str) -> str:
    """Model file for a fitted classifier, stamped with the run's config hash."""
    doc = {"format": "earlyrumor-pipeline", "version": 1, "kind": pipe.kind, "hour": hour,
           "config_hash": config_hash}
    if pipe.kind == "rf":
        doc["model"] = json.loads(forest_to_json(pipe.model))
    else:
        doc["model"] = json.loads(svm_to_json(pipe.model))
        doc["mean"] = base64.b64encode(np.ascontiguousarray(pipe.mean, "<f8").tobytes()).decode()
        doc["scale"] = base64.b64encode(np.ascontiguousarray(pipe.scale, "<f8").tobytes()).decode()
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------

@dataclass
class IngestedEvent:
    event: Event
    buckets: list[IntervalBucket]
    t_0: str
    t_max: str
    t_end: str
    dropped: int

    @property
    def volume(self) -> np.ndarray:
        return np.array([len(b.tweets) for b in self.buckets], dtype=float)


class PipelineRun:
    """Lazily evaluated stages over one output directory.

    With ``reuse`` a stage whose artifact already exists in ``out`` loads it
    instead of recomputing; ``run_all`` always recomputes.
    """

    def __init__(self, config: PipelineConfig, out: str | Path, *, reuse: bool = True):
        validate_config(config)
        self.cfg = config
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.reuse = reuse
        self._events: list[IngestedEvent] | None = None
        self._tables = None
        self._debunk = None
        self._model = None
        self._scores: dict[str, list[np.ndarray]] | None = None
        self._features: dict[str, np.ndarray] | None = None
        self._epi: dict[str, np.ndarray] | None = None
        self._datasets: dict[tuple[int, bool], Dataset] = {}
        self._cv: dict[tuple[str, str, int], object] = {}
        self._importance: dict[int, list[tuple[str, float]]] | None = None
        self.written: list[Path] = []

    def _path(self, name: str) -> Path:
        return self.out / name

    def _have(self, name: str) -> bool:
        return self.reuse and self._path(name).is_file()

    def _wrote(self, path: Path) -> None:
        if path not in self.written:
            self.written.append(path)

    # -- ingest ------------------------------------------------------------
    def _load_resources(self):
        if self._tables is None:
            self._tables = load_tables(self.cfg.tables_dir)
            self._debunk = load_debunk_lexicon(self.cfg.debunk_words)

    def ingest(self) -> list[IngestedEvent]:
        if self._events is not None:
            return self._events
        events = load_events(self.cfg.tweets, self.cfg.events)
        out = []
        path = self._path("windows.csv")
        with _artifact(path) as fh, _artifact(self._path("drops.jsonl")) as dh:
            w = _csv_writer(fh)
            w.writerow(["event_id", "label", "t_0", "t_max", "t_end", "n_tweets", "dropped"])
            for ev in events:
                try:
                    win, buckets, drop = window_event(ev, self.cfg.n_intervals)
                except Exception as exc:
                    raise PipelineError("ingest", ev.event_id, exc) from exc
                item = IngestedEvent(ev, buckets, format_timestamp(win.t_0),
                                     format_timestamp(win.t_max), format_timestamp(win.t_end),
                                     drop.dropped_count)
                out.append(item)
                w.writerow([ev.event_id, ev.label, item.t_0, item.t_max, item.t_end,
                            int(item.volume.sum()), item.dropped])
                dh.write(drop.to_json() + "\n")
        self._wrote(path)
        self._wrote(self._path("drops.jsonl"))
        self._events = out
        return out

    # -- credibility -------------------------------------------------------
    def credibility_model(self):
        if self._model is not None:
            return self._model
        path = self._path("credibility_model.json")
        if self._have("credibility_model.json"):
            self._model = load_model(path)
        elif self.cfg.credibility_model is not None:
            self._model = load_model(self.cfg.credibility_model)
        else:
            try:
                data = read_labeled_tweets(self.cfg.labeled_tweets)
                self._model = train_credibility(data, self.cfg.hyper)
            except Exception as exc:
                raise PipelineError("train-credibility", None, exc) from exc
            tmp = path.with_name(path.name + ".partial")
            save_model(self._model, tmp)
            os.replace(tmp, path)
            self._wrote(path)
        return self._model

    def tweet_scores(self) -> dict[str, list[np.ndarray]]:
        """``p_news`` per tweet, grouped by event and interval."""
        if self._scores is not None:
            return self._scores
        events = self.ingest()
        path = self._path("tweet_scores.csv")
        scores: dict[str, list[np.ndarray]] = {}
        if self._have("tweet_scores.csv"):
            _, rows = _read_csv(path)
            tmp: dict[str, list[list[float]]] = {
                e.event.event_id: [[] for _ in range(self.cfg.n_intervals)] for e in events}
            for eid, _tid, interval, p in rows:
                tmp[eid][int(interval)].append(float(p))
            scores = {eid: [np.array(v) for v in per] for eid, per in tmp.items()}
        else:
            model = self.credibility_model()
            with _artifact(path) as fh:
                w = _csv_writer(fh)
                w.writerow(["event_id", "tweet_id", "interval", "p_news"])
                for item in events:
                    eid = item.event.event_id
                    try:
                        texts = [tw.text for b in item.buckets for tw in b.tweets]
                        p = score_texts(model, texts)
                    except Exception as exc:
                        raise PipelineError("score", eid, exc) from exc
                    per, k = [], 0
                    for b in item.buckets:
                        per.append(p[k:k + len(b.tweets)])
                        for tw, pv in zip(b.tweets, per[-1]):
                            w.writerow([eid, tw.id, b.index, _num(pv)])
                        k += len(b.tweets)
                    scores[eid] = per
            self._wrote(path)
        self._scores = scores
        return scores

    # -- interval features -------------------------------------------------
    def interval_features(self) -> dict[str, np.ndarray]:
        """Per event an (n_intervals, 36) array in ``INTERVAL_FEATURES`` order."""
        if self._features is not None:
            return self._features
        path = self._path("features.csv")
        if self._have("features.csv"):
            self._features = _read_frame_csv(path, INTERVAL_FEATURES, self.cfg.n_intervals)
            return self._features
        events = self.ingest()
        scores = self.tweet_scores()
        self._load_resources()
        lex = self._tables.sentiment_lexicon
        out = {}
        with _artifact(path) as fh:
            w = _csv_writer(fh)
            w.writerow(["event_id", "interval", *INTERVAL_FEATURES])
            for item in events:
                eid = item.event.event_id
                try:
                    rows = []
                    for b in item.buckets:
                        row = np.concatenate([
                            extract_text_features(b, lex),
                            extract_twitter_features(b, self._tables),
                            extract_user_features(b, self._tables),
                            [crowd_wisdom(b, self._debunk), credit_score(scores[eid][b.index])],
                        ])
                        rows.append(row)
                        w.writerow([eid, b.index, *map(_num, row)])
                except Exception as exc:
                    raise PipelineError("features", eid, exc) from exc
                out[eid] = np.vstack(rows)
        self._wrote(path)
        self._features = out
        return out

    # -- epidemic fits -----------------------------------------------------
    def epi_features(self) -> dict[str, np.ndarray]:
        """Per event an (n_intervals, 15) array; row t is fitted on buckets 0..t."""
        if self._epi is not None:
            return self._epi
        path = self._path("epi_features.csv")
        if self._have("epi_features.csv"):
            self._epi = _read_frame_csv(path, EPI_FEATURES, self.cfg.n_intervals)
            return self._epi
        events = self.ingest()
        extra = [f"sse_{m}" for m in EPI_MODELS] + [f"converged_{m}" for m in EPI_MODELS]
        out = {}
        fit_path = self._path("plots/volume_fits.csv")
        with _artifact(path) as fh, _artifact(fit_path) as ph:
            w = _csv_writer(fh)
            w.writerow(["event_id", "interval", *EPI_FEATURES, *extra])
            pw = _csv_writer(ph)
            pw.writerow(["event_id", "label", "interval", "observed", *EPI_MODELS])
            for item in events:
                eid = item.event.event_id
                vol = item.volume
                rows = []
                feats = fallback_features()
                try:
                    for t in range(self.cfg.n_intervals):
                        if t >= 1:
                            feats = fit_epi_features(vol[:t + 1], seed=self.cfg.seed,
                                                     n_starts=self.cfg.epi_starts,
                                                     warm=feats if t > 1 else None)
                        rows.append(feats.values.copy())
                        w.writerow([eid, t, *map(_num, feats.values), *map(_num, feats.sse),
                                    *map(_num, feats.converged)])
                    curves = _fitted_curves(feats, vol.size)
                except Exception as exc:
                    raise PipelineError("fit-epi", eid, exc) from exc
                for t in range(vol.size):
                    pw.writerow([eid, item.event.label, t, _num(vol[t]),
                                 *(_num(curves[m][t]) if m in curves else "" for m in EPI_MODELS)])
                out[eid] = np.vstack(rows)
        self._wrote(path)
        self._wrote(fit_path)
        self._epi = out
        return out

    # -- frames and DSTS -----------------------------------------------------
    def frames(self) -> list[EventFrames]:
        events = self.ingest()
        feats = self.interval_features()
        epi = self.epi_features()
        n_text = len(TEXT_FEATURES) + len(TWITTER_FEATURES) + len(USER_FEATURES)
        out = []
        for item in events:
            eid = item.event.event_id
            f = feats[eid]
            frames = np.hstack([f[:, :n_text], epi[eid], f[:, n_text:]])
            out.append(EventFrames(eid, item.event.y, frames))
        return out

    def dataset(self, hour: int, normalize: bool) -> Dataset:
        key = (hour, normalize)
        if key not in self._datasets:
            try:
                self._datasets[key] = build_dataset(self.frames(), hour, normalize=normalize)
            except Exception as exc:
                raise PipelineError("dsts", None, exc) from exc
        return self._datasets[key]

    def write_dsts(self) -> list[Path]:
        """One CSV per prefix hour with the un-normalised event vectors."""
        paths = []
        for h in self.cfg.hours:
            data = self.dataset(h, False)
            path = self._path(f"dsts_h{h}.csv")
            with _artifact(path) as fh:
                w = _csv_writer(fh)
                w.writerow(["event_id", "prefix_hours", "label", *data.feature_names])
                for eid, y, row in zip(data.event_ids, data.y, data.X):
                    w.writerow([eid, h, "rumor" if y == 1 else "news", *map(_num, row)])
            self._wrote(path)
            paths.append(path)
        return paths

    # -- evaluation ----------------------------------------------------------
    def _model_kw(self, kind: str) -> dict:
        if kind == "rf":
            return {"n_trees": self.cfg.n_trees}
        return {"C": self.cfg.svm_C, "gamma": self.cfg.svm_gamma}

    def _group_features(self, group: str) -> Sequence[str] | None:
        if group == "All":
            return None
        if group == "BestSet":
            return best_set(self.importance(), BEST_SET_SIZE)
        return FEATURE_GROUPS[group]

    def _group_data(self, hour: int, kind: str, group: str) -> Dataset:
        data = self.dataset(hour, kind == "svm")
        feats = self._group_features(group)
        if feats is None:
            return data
        cols = group_columns(feats, hour)
        return data.subset(np.arange(len(data)), cols)

    def cv(self, kind: str, group: str, hour: int):
        key = (kind, group, hour)
        if key not in self._cv:
            try:
                self._cv[key] = cross_validate(self._group_data(hour, kind, group), kind,
                                               self.cfg.seed, n_folds=self.cfg.n_folds,
                                               keep_models=(group == "All"),
                                               **self._model_kw(kind))
            except Exception as exc:
                raise PipelineError("evaluate", None, exc) from exc
        return self._cv[key]

    def importance(self) -> dict[int, list[tuple[str, float]]]:
        """Held-out permutation importance of the all-feature forest, averaged over folds."""
        if self._importance is not None:
            return self._importance
        path = self._path("importance.csv")
        if self._have("importance.csv"):
            _, rows = _read_csv(path)
            imp: dict[int, list[tuple[str, float]]] = {}
            for feat, _rank, value, hour in rows:
                imp.setdefault(int(hour), []).append((feat, float(value)))
            self._importance = {h: rank_importance(v) for h, v in imp.items()}
            return self._importance
        hours = self.cfg.importance_hours or self.cfg.hours
        result = {}
        for h in hours:
            cv = self.cv("rf", "All", h)
            data = self.dataset(h, False)
            groups = base_feature_groups(data.feature_names)
            totals = dict.fromkeys(groups, 0.0)
            try:
                for k, pipe in enumerate(cv.pipelines):
                    test = data.subset(np.flatnonzero(cv.folds == k))
                    for name, value in permutation_importance(pipe, test,
                                                              self.cfg.importance_repeats,
                                                              self.cfg.seed + k, groups):
                        totals[name] += value / len(cv.pipelines)
            except Exception as exc:
                raise PipelineError("importance", None, exc) from exc
            result[h] = rank_importance(totals.items())
        with _artifact(path) as fh:
            w = _csv_writer(fh)
            w.writerow(["feature", "rank", "importance", "hour"])
            for h in hours:
                for rank, (name, value) in enumerate(result[h], start=1):
                    w.writerow([name, rank, _num(value), h])
        self._wrote(path)
        self._importance = result
        return result

    def evaluate(self) -> list[ReportRow]:
        rows: list[ReportRow] = []
        for kind in self.cfg.models:
            for group in self.cfg.feature_groups:
                for h in self.cfg.hours:
                    cv = self.cv(kind, group, h)
                    rows += [ReportRow(kind, group, h, str(k), float(a))
                             for k, a in enumerate(cv.fold_accuracy)]
                    rows += [ReportRow(kind, group, h, "mean", cv.mean),
                             ReportRow(kind, group, h, "std", cv.std),
                             ReportRow(kind, group, h, "pooled", cv.pooled_accuracy)]
        path = self._path("report.csv")
        with _artifact(path) as fh:
            w = _csv_writer(fh)
            w.writerow(["model", "feature_group", "hour", "fold", "accuracy"])
            for r in rows:
                w.writerow([r.model, r.feature_group, r.hour, r.fold, _num(r.accuracy)])
        self._wrote(path)
        plot = self._path("plots/accuracy_over_time.csv")
        with _artifact(plot) as fh:
            w = _csv_writer(fh)
            w.writerow(["model", "feature_group", "hour", "mean", "std", "pooled"])
            for kind in self.cfg.models:
                for group in self.cfg.feature_groups:
                    for h in self.cfg.hours:
                        cv = self.cv(kind, group, h)
                        w.writerow([kind, group, h, _num(cv.mean), _num(cv.std),
                                    _num(cv.pooled_accuracy)])
        self._wrote(plot)
        return rows

    def credit_plot(self) -> Path:
        feats = self.interval_features()
        col = INTERVAL_FEATURES.index("CreditScore")
        path = self._path("plots/credit_score.csv")
        with _artifact(path) as fh:
            w = _csv_writer(fh)
            w.writerow(["event_id", "label", "interval", "CreditScore", "n_tweets"])
            for item in self.ingest():
                eid = item.event.event_id
                for t, b in enumerate(item.buckets):
                    w.writerow([eid, item.event.label, t, _num(feats[eid][t, col]), len(b.tweets)])
        self._wrote(path)
        return path

    def train_models(self) -> list[Path]:
        """Fit each model kind on every event at the longest prefix."""
        hour = max(self.cfg.hours)
        paths = []
        for kind in self.cfg.models:
            data = self.dataset(hour, kind == "svm")
            try:
                pipe = fit_pipeline(kind, data.X, data.y, seed=self.cfg.seed,
                                    **self._model_kw(kind))
                if kind == "rf":
                    pipe.model.feature_names = list(data.feature_names)
            except Exception as exc:
                raise PipelineError("train", None, exc) from exc
            path = self._path(f"models/{kind}_h{hour}.json")
            with _artifact(path) as fh:
                fh.write(pipeline_to_json(pipe, hour=hour, config_hash=self.cfg.hash()))
            self._wrote(path)
            paths.append(path)
        return paths

    def write_manifest(self) -> Path:
        versions = {"earlyrumor": _version("earlyrumor"), "python": platform.python_version(),
                    "numpy": np.__version__, "numba": _version("numba"),
                    "scikit-learn": _version("scikit-learn")}
        inputs = {k: {"path": getattr(self.cfg, k), "sha256": _sha256(Path(getattr(self.cfg, k)))}
                  for k in _PATH_FIELDS
                  if getattr(self.cfg, k) and Path(getattr(self.cfg, k)).is_file()}
        hyper = self.cfg.hyper
        doc = {
            "config": self.cfg.to_dict(),
            "config_hash": self.cfg.hash(),
            "versions": versions,
            "seeds": {"pipeline": self.cfg.seed, "credibility": hyper.seed,
                      "epi": self.cfg.seed, "folds": self.cfg.seed,
                      "fold_models": [self.cfg.seed + k for k in range(self.cfg.n_folds)],
                      "importance": [self.cfg.seed + k for k in range(self.cfg.n_folds)]},
            "inputs": inputs,
            "artifacts": {str(p.relative_to(self.out)): _sha256(p)
                          for p in sorted(self.written) if p.is_file()},
        }
        path = self._path("manifest.json")
        with _artifact(path) as fh:
            fh.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return path

    def run_all(self) -> Path:
        self.ingest()
        self.credibility_model()
        self.tweet_scores()
        self.interval_features()
        self.credit_plot()
        self.epi_features()
        self.write_dsts()
        if "BestSet" in self.cfg.feature_groups or "rf" in self.cfg.models:
            self.importance()
        self.evaluate()
        self.train_models()
        self.write_manifest()
        return self.out


def _version(dist: str) -> str:
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "unknown"


def _read_frame_csv(path: Path, names: Sequence[str], n_intervals: int) -> dict[str, np.ndarray]:
    header, rows = _read_csv(path)
    if header[:2] != ["event_id", "interval"] or header[2:2 + len(names)] != list(names):
        raise ValueError(f"{path}: unexpected header")
    out: dict[str, np.ndarray] = {}
    for row in rows:
        arr = out.setdefault(row[0], np.zeros((n_intervals, len(names))))
        arr[int(row[1])] = [float(v) for v in row[2:2 + len(names)]]
    return out


def _fitted_curves(feats, steps: int) -> dict[str, np.ndarray]:
    curves = {}
    fits = feats.fits
    if fits.get("SIS") is not None:
        curves["SIS"] = simulate_sis(fits["SIS"].params, steps)
    if fits.get("SEIZ") is not None:
        p: SeizParams = fits["SEIZ"].params
        curves["SEIZ"] = simulate_seiz(p, steps)
    if fits.get("SpikeM") is not None:
        curves["SpikeM"] = simulate_spikem(fits["SpikeM"].params, steps)
    return curves


def run_pipeline(config: PipelineConfig, out: str | Path) -> Path:
    """Recompute every stage into ``out`` and return it."""
    return PipelineRun(config, out, reuse=False).run_all()


# ---------------------------------------------------------------------------
# self-check of artifacts
# ---------------------------------------------------------------------------

ARTIFACT_HEADERS = {
    "windows.csv": ["event_id", "label", "t_0", "t_max", "t_end", "n_tweets", "dropped"],
    "tweet_scores.csv": ["event_id", "tweet_id", "interval", "p_news"],
    "features.csv": ["event_id", "interval", *INTERVAL_FEATURES],
    "epi_features.csv": ["event_id", "interval", *EPI_FEATURES,
                         *(f"sse_{m}" for m in EPI_MODELS), *(f"converged_{m}" for m in EPI_MODELS)],
    "report.csv": ["model", "feature_group", "hour", "fold", "accuracy"],
    "importance.csv": ["feature", "rank", "importance", "hour"],
    "plots/accuracy_over_time.csv": ["model", "feature_group", "hour", "mean", "std", "pooled"],
    "plots/volume_fits.csv": ["event_id", "label", "interval", "observed", *EPI_MODELS],
    "plots/credit_score.csv": ["event_id", "label", "interval", "CreditScore", "n_tweets"],
}
# columns that must parse as finite numbers (sse may be nan for a failed fit)
_NUMERIC_FROM = {"tweet_scores.csv": 2, "features.csv": 1, "epi_features.csv": 1,
                 "report.csv": 4, "importance.csv": 2, "plots/accuracy_over_time.csv": 3,
                 "plots/credit_score.csv": 3}


def validate_artifacts(out: str | Path, config_hash: str | None = None) -> list[str]:
    """Check every known artifact present in ``out``; returns problems (empty when valid).

    With ``config_hash``, the manifest and model files must also record that hash.
    """
    out = Path(out)
    problems = []
    for name, header in ARTIFACT_HEADERS.items():
        path = out / name
        if not path.is_file():
            continue
        got, rows = _read_csv(path)
        if got != header:
            problems.append(f"{name}: header mismatch")
            continue
        start = _NUMERIC_FROM.get(name)
        for no, row in enumerate(rows, start=2):
            if len(row) != len(header):
                problems.append(f"{name}:{no}: expected {len(header)} fields, got {len(row)}")
                break
            if start is None:
                continue
            try:
                vals = [float(v) for v in row[start:]]
            except ValueError:
                problems.append(f"{name}:{no}: non-numeric value")
                break
            if name != "epi_features.csv" and not all(np.isfinite(vals)):
                problems.append(f"{name}:{no}: non-finite value")
                break
    for path in sorted(out.glob("dsts_h*.csv")):
        header, rows = _read_csv(path)
        if header[:3] != ["event_id", "prefix_hours", "label"]:
            problems.append(f"{path.name}: header mismatch")
            continue
        h = int(path.stem.split("_h", 1)[1])
        expect = len(FRAME_FEATURES) * (2 * h - 1 if h > 1 else 1)
        if len(header) - 3 != expect:
            problems.append(f"{path.name}: {len(header) - 3} vector columns, expected {expect}")
        for no, row in enumerate(rows, start=2):
            if len(row) != len(header) or row[1] != str(h) or row[2] not in ("rumor", "news"):
                problems.append(f"{path.name}:{no}: malformed row")
                break
    manifest = out / "manifest.json"
    if manifest.is_file():
        doc = json.loads(manifest.read_text(encoding="utf-8"))
        for rel, digest in doc.get("artifacts", {}).items():
            p = out / rel
            if p.is_file() and _sha256(p) != digest:
                problems.append(f"{rel}: digest differs from manifest")
        if config_hash is not None and doc.get("config_hash") != config_hash:
            problems.append("manifest.json: written under a different configuration")
    if config_hash is not None:
        for p in sorted((out / "models").glob("*.json")):
            if json.loads(p.read_text(encoding="utf-8")).get("config_hash") != config_hash:
                problems.append(f"{p.relative_to(out)}: trained under a different configuration")
    problems += [f"{p.relative_to(out)}: left over from a failed stage"
                 for p in sorted(out.rglob("*.partial"))]
    return problems
