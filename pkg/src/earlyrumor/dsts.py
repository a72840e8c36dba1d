"""Time-series event vectors: per-event Z-scoring, frame concatenation and slopes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ensemble import ENSEMBLE_FEATURES
from .epi import EPI_FEATURES
from .features import TEXT_FEATURES, TWITTER_FEATURES, USER_FEATURES

FRAME_FEATURES = TEXT_FEATURES + TWITTER_FEATURES + USER_FEATURES + EPI_FEATURES + ENSEMBLE_FEATURES

FEATURE_GROUPS = {
    "Text": TEXT_FEATURES,
    "Twitter": TWITTER_FEATURES,
    "User": USER_FEATURES,
    "Epidemiological": EPI_FEATURES[:9],
    "SpikeM": EPI_FEATURES[9:],
    "CrowdWisdom": ("CrowdWisdom",),
    "CreditScore": ("CreditScore",),
}


class InsufficientFramesError(ValueError):
    """Slopes need at least two frames."""


class NonFiniteFeatureError(ValueError):
    """A frame holds NaN or infinity."""

    def __init__(self, t: int, k: int):
        self.t, self.k = t, k
        super().__init__(f"non-finite feature value at interval {t}, feature {k}")


@dataclass(frozen=True)
class DSTSVector:
    values: np.ndarray
    n_frames: int
    n_features: int
    event_id: str | None = None
    prefix_hours: int | None = None

    def __len__(self) -> int:
        return self.values.size


def _check_finite(frames: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(frames))
    if bad.size:
        raise NonFiniteFeatureError(int(bad[0, 0]), int(bad[0, 1]))


def _as_matrix(frames) -> np.ndarray:
    m = np.asarray(frames, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("frames must be an N x D matrix with N >= 1")
    return m


def zscore_normalize(frames) -> np.ndarray:
    """Per-column Z-score with the population std over the event's intervals.

    Constant columns map to zeros.
    """
    m = _as_matrix(frames)
    _check_finite(m)
    n = m.shape[0]
    # exactly rounded column sums make the result independent of summation order
    mean = np.array([math.fsum(col) / n for col in m.T])
    centred = m - mean
    std = np.sqrt(np.array([math.fsum(col) / n for col in (centred * centred).T]))
    out = np.zeros_like(m)
    # relative threshold so round-off on a constant column does not count as spread
    scale = np.maximum(np.abs(mean), 1.0)
    live = std > 1e-12 * scale
    out[:, live] = centred[:, live] / std[live]
    return out


def slope_block(frames, interval_length: float = 1.0) -> np.ndarray:
    """Forward differences between consecutive frames, per hour of interval length."""
    m = _as_matrix(frames)
    if m.shape[0] < 2:
        raise InsufficientFramesError("slope block needs at least 2 frames")
    return (m[1:] - m[:-1]) / float(interval_length)


def build_dsts_vector(frames, interval_length: float = 1.0, normalize: bool = True, *,
                      event_id: str | None = None,
                      prefix_hours: int | None = None) -> DSTSVector:
    """Concatenate all (optionally Z-scored) frames, then all slopes between them.

    A single frame yields just that frame (no slopes), which keeps the
    length ``D * (2N - 1)`` valid at N = 1.
    """
    m = _as_matrix(frames)
    _check_finite(m)
    emitted = zscore_normalize(m) if normalize else m
    parts = [emitted.ravel()]
    if m.shape[0] >= 2:
        parts.append(slope_block(emitted, interval_length).ravel())
    return DSTSVector(np.concatenate(parts), m.shape[0], m.shape[1], event_id, prefix_hours)


def dsts_column_names(n_frames: int, features: Sequence[str] = FRAME_FEATURES) -> list[str]:
    names = [f"{f}@t{t}" for t in range(n_frames) for f in features]
    names += [f"d{f}@t{t}" for t in range(n_frames - 1) for f in features]
    return names


def base_feature(column: str) -> str:
    """Map a DSTS column name back to its frame feature."""
    name = column.split("@", 1)[0]
    if name not in FRAME_FEATURES and name.startswith("d") and name[1:] in FRAME_FEATURES:
        return name[1:]
    return name


def group_columns(features: Sequence[str], n_frames: int,
                  full: Sequence[str] = FRAME_FEATURES) -> np.ndarray:
    """Indices of the DSTS columns that belong to ``features``."""
    wanted = set(features)
    unknown = wanted - set(full)
    if unknown:
        raise KeyError(f"unknown features {sorted(unknown)}")
    d = len(full)
    per_frame = [k for k, f in enumerate(full) if f in wanted]
    idx = [t * d + k for t in range(n_frames) for k in per_frame]
    idx += [n_frames * d + t * d + k for t in range(n_frames - 1) for k in per_frame]
    return np.array(sorted(idx), dtype=int)


@dataclass
class EventFrames:
    """All per-interval frames of one event (frame t uses only buckets <= t)."""
    event_id: str
    y: int
    frames: np.ndarray


def build_dataset(events: Sequence[EventFrames], prefix_hours: int, normalize: bool = True,
                  features: Sequence[str] | None = None, interval_length: float = 1.0,
                  full: Sequence[str] = FRAME_FEATURES):
    """Design matrix of prefix-``h`` event vectors, restricted to ``features`` if given."""
    from .classifier.data import Dataset

    if not events:
        raise ValueError("no events")
    if prefix_hours < 1:
        raise ValueError("prefix_hours must be >= 1")
    rows = []
    for ev in events:
        if ev.frames.shape[0] < prefix_hours:
            raise InsufficientFramesError(f"event {ev.event_id} has only {ev.frames.shape[0]} frames")
        rows.append(build_dsts_vector(ev.frames[:prefix_hours], interval_length, normalize,
                                      event_id=ev.event_id, prefix_hours=prefix_hours).values)
    X = np.vstack(rows)
    names = dsts_column_names(prefix_hours, full)
    if features is not None:
        cols = group_columns(features, prefix_hours, full)
        X = X[:, cols]
        names = [names[c] for c in cols]
    return Dataset(X, np.array([ev.y for ev in events]), [ev.event_id for ev in events], names)
