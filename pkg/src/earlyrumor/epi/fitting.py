"""Fit SIS, SEIZ and SpikeM to a tweet-volume prefix.

Every fit is a seeded multi-start Levenberg-Marquardt run. Start points are
chosen by drawing a pool of candidates from each model's init box, scoring
them by SSE and keeping the best ``n_starts`` (a warm start, when given,
always takes the first slot). The lowest final SSE wins; ties go to the
earlier start.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .lm import FitInitError, LMResult, levenberg_marquardt
from .models import (
    NumericError,
    SeizParams,
    SisParams,
    SpikeMParams,
    rsi,
    seiz_volume,
    sis_volume,
    spikem_volume,
)

POPULATION_FACTOR = 10.0
N_CANDIDATES = 48
SPIKEM_CANDIDATES = 512
RACE_ITER = 20
MIN_SEPARATION = 0.25
RACE_KEEP = 1

EPI_FEATURES = (
    "BetaSIS", "AlphaSIS",
    "BetaSEIZ", "bSEIZ", "lSEIZ", "pSEIZ", "EpsilonSEIZ", "RhoSEIZ", "RSI",
    "Ps", "Pa", "Pp", "Qs", "Qa", "Qp",
)
EPI_GROUP = EPI_FEATURES[:9]
SPIKEM_GROUP = EPI_FEATURES[9:]


class InsufficientDataError(ValueError):
    """The volume prefix is too short to fit."""


# aux layout shared by all residuals: [population, cumulative_flag, <model extras>, y...]

@numba.njit(cache=True)
def _finish_residual(sim, aux, offset):
    y = aux[offset:]
    if aux[1] > 0.5:
        sim = np.cumsum(sim)
    return sim - y


@numba.njit(cache=True)
def _sis_residual(theta, aux):
    n = aux.size - 2
    sim = sis_volume(theta[0], theta[1], aux[0], n)
    return _finish_residual(sim, aux, 2)


@numba.njit(cache=True)
def _seiz_residual(theta, aux):
    n = aux.size - 4
    sim = seiz_volume(theta[0], theta[1], theta[2], theta[3], theta[4], theta[5],
                      aux[0], n, aux[2], aux[3])
    return _finish_residual(sim, aux, 4)


@numba.njit(cache=True)
def _spikem_full(theta, aux):
    # aux: [N, cum, start, mask x9, fixed x9, y...]; theta holds the free entries
    # with beta scaled by N.
    full = np.empty(9)
    k = 0
    for j in range(9):
        if aux[3 + j] > 0.5:
            full[j] = theta[k]
            k += 1
        else:
            full[j] = aux[12 + j]
    return full


@numba.njit(cache=True)
def _spikem_residual(theta, aux):
    n = aux.size - 21
    f = _spikem_full(theta, aux)
    sim = spikem_volume(f[0] / aux[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8],
                        int(aux[2]), aux[0], n)
    return _finish_residual(sim, aux, 21)


# not cached: takes a dispatcher argument
@numba.njit
def _screen(residual, cands, aux):
    out = np.empty(cands.shape[0])
    for c in range(cands.shape[0]):
        r = residual(cands[c], aux)
        s = np.dot(r, r)
        out[c] = s if np.isfinite(s) else np.inf
    return out


@dataclass
class EpiFitResult:
    model: str
    params: SisParams | SeizParams | SpikeMParams
    residual_sse: float
    iterations: int
    converged: bool
    n_points: int
    condition: float = float("nan")
    starts: list[LMResult] = field(default_factory=list, repr=False)

    @property
    def mse(self) -> float:
        return self.residual_sse / max(self.n_points, 1)


# ---------------------------------------------------------------------------
# candidate generation
# ---------------------------------------------------------------------------

def _draw(rng: np.random.Generator, box: list[tuple[float, float, bool]], n: int) -> np.ndarray:
    cols = []
    for lo, hi, log in box:
        if log:
            cols.append(np.exp(rng.uniform(np.log(lo), np.log(hi), n)))
        else:
            cols.append(rng.uniform(lo, hi, n))
    return np.column_stack(cols)


def _unit_coords(cands: np.ndarray, box) -> np.ndarray:
    out = np.empty_like(cands)
    for j, (lo, hi, log) in enumerate(box):
        if log:
            out[:, j] = (np.log(np.maximum(cands[:, j], 1e-300)) - np.log(lo)) / (np.log(hi) - np.log(lo))
        else:
            out[:, j] = (cands[:, j] - lo) / (hi - lo)
    return out


def _multistart(residual, aux, box, bounds, *, n_starts, seed, warm_start, max_iter=200,
                race_iter=RACE_ITER, race_keep=RACE_KEEP, n_candidates=N_CANDIDATES,
                period_cols=(), periods=()):
    """Seeded multi-start LM.

    All starts run ``race_iter`` iterations; the ``race_keep`` best then
    continue up to ``max_iter`` iterations in total. When ``periods`` is
    given, half of the candidates take their ``period_cols`` entries from
    it (with 10% jitter) instead of the box.
    """
    rng = np.random.default_rng(seed)
    cands = _draw(rng, box, n_candidates)
    group = np.full(n_candidates, -1)
    if len(periods) and len(period_cols):
        half = n_candidates // 2
        group[:half] = rng.integers(0, len(periods), size=half)
        for j in period_cols:
            cands[:half, j] = np.asarray(periods, dtype=float)[group[:half]] * rng.uniform(0.9, 1.1, size=half)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    cands = np.clip(cands, lo, hi)
    scores = _screen(residual, cands, aux)
    order = np.argsort(scores, kind="stable")
    starts = []
    if warm_start is not None:
        starts.append(np.clip(np.asarray(warm_start, dtype=float), lo, hi))
    unit = _unit_coords(cands, box)
    picked = []
    # the best candidate of each spectral period group gets a start of its own
    for g in range(len(periods) if len(period_cols) else 0):
        members = [i for i in order if group[i] == g and np.isfinite(scores[i])]
        if members and len(starts) < n_starts:
            picked.append(members[0])
            starts.append(cands[members[0]])
    for idx in order:
        if idx in picked:
            continue
        if len(starts) >= n_starts:
            break
        if not np.isfinite(scores[idx]):
            break
        if any(np.max(np.abs(unit[idx] - unit[j])) < MIN_SEPARATION for j in picked):
            continue
        picked.append(idx)
        starts.append(cands[idx])
    if not starts:
        raise FitInitError("no finite start point")
    first = min(race_iter, max_iter)
    results = []
    for s in starts:
        try:
            results.append(levenberg_marquardt(residual, s, bounds, aux=aux, max_iter=first))
        except FitInitError:
            results.append(None)
    alive = [i for i, r in enumerate(results) if r is not None]
    if not alive:
        raise FitInitError("residual not finite at any start")
    alive.sort(key=lambda i: (results[i].sse, i))
    for i in alive[:race_keep]:
        r = results[i]
        if r.converged or max_iter <= first:
            continue
        more = levenberg_marquardt(residual, r.params, bounds, aux=aux, max_iter=max_iter - first)
        more.iterations += r.iterations
        more.sse_history = np.concatenate([r.sse_history, more.sse_history[1:]])
        results[i] = more
    best = min(alive, key=lambda i: (results[i].sse, i))
    return results[best], [r for r in results if r is not None]


def _prepare(volume, population, target):
    y = np.asarray(volume, dtype=float).ravel()
    if y.size < 1 or not np.all(np.isfinite(y)):
        raise ValueError("volume must be a non-empty finite sequence")
    if population is None:
        population = POPULATION_FACTOR * float(y.sum())
    if population <= 0:
        raise FitInitError("population must be positive (all-zero volume?)")
    if target not in ("interval", "cumulative"):
        raise ValueError(f"unknown fit target {target!r}")
    cum = 1.0 if target == "cumulative" else 0.0
    obs = np.cumsum(y) if cum else y
    return y, float(population), cum, obs


# ---------------------------------------------------------------------------
# public fitters
# ---------------------------------------------------------------------------

SIS_BOUNDS = [(0.0, 5.0), (0.0, 5.0)]
SIS_BOX = [(0.05, 3.0, True), (0.005, 2.0, True)]

SEIZ_BOUNDS = [(0.0, 5.0), (0.0, 5.0), (0.0, 1.0), (0.0, 1.0), (1e-6, 5.0), (1e-6, 5.0)]
SEIZ_BOX = [(0.05, 3.0, True), (0.05, 3.0, True), (0.0, 1.0, False), (0.0, 1.0, False),
            (0.005, 2.0, True), (0.01, 3.0, True)]


def fit_sis(volume, *, population=None, n_starts: int = 5, seed: int = 0,
            warm_start=None, target: str = "interval") -> EpiFitResult:
    y, pop, cum, obs = _prepare(volume, population, target)
    aux = np.concatenate([[pop, cum], obs])
    best, runs = _multistart(_sis_residual, aux, SIS_BOX, SIS_BOUNDS,
                             n_starts=n_starts, seed=seed, warm_start=warm_start)
    beta, alpha = best.params
    return EpiFitResult("SIS", SisParams(float(beta), float(alpha), pop), best.sse,
                        best.iterations, best.converged, y.size, best.jtj_condition, runs)


def fit_seiz(volume, *, population=None, n_starts: int = 5, seed: int = 0,
             warm_start=None, target: str = "interval", i0: float = 1.0,
             z0: float = 1.0) -> EpiFitResult:
    y, pop, cum, obs = _prepare(volume, population, target)
    aux = np.concatenate([[pop, cum, i0, z0], obs])
    best, runs = _multistart(_seiz_residual, aux, SEIZ_BOX, SEIZ_BOUNDS,
                             n_starts=n_starts, seed=seed, warm_start=warm_start)
    params = SeizParams(*(float(v) for v in best.params), population=pop)
    return EpiFitResult("SEIZ", params, best.sse, best.iterations, best.converged,
                        y.size, best.jtj_condition, runs)


SPIKEM_BOUNDS = [(0.0, 50.0), (0.0, np.inf), (0.0, np.inf), (2.0, 48.0), (0.0, 1.0),
                 (0.0, 48.0), (2.0, 48.0), (0.0, 1.0), (0.0, 48.0)]


def _spikem_box(y: np.ndarray) -> list[tuple[float, float, bool]]:
    head = max(float(y[0]), 1.0)
    return [(0.02, 2.0, True), (0.05 * head, 2.0 * head, True), (1e-3, 0.5 * head, True),
            (4.0, 36.0, False), (0.0, 1.0, False), (0.0, 24.0, False),
            (4.0, 36.0, False), (0.0, 1.0, False), (0.0, 24.0, False)]


def dominant_periods(y: np.ndarray, k: int = 3, min_period: float = 2.0) -> np.ndarray:
    """Periods of the ``k`` strongest periodogram peaks of the detrended log volume."""
    n = y.size
    if n < 6:
        return np.empty(0)
    x = np.arange(n, dtype=float)
    ly = np.log1p(np.maximum(y, 0.0))
    trend = np.polyval(np.polyfit(x, ly, min(3, n - 3)), x)
    power = np.abs(np.fft.rfft(ly - trend)) ** 2
    freq = np.fft.rfftfreq(n)
    ok = (freq > 0) & (freq <= 1.0 / min_period)
    if not np.any(ok):
        return np.empty(0)
    idx = np.flatnonzero(ok)
    top = idx[np.argsort(power[idx], kind="stable")[::-1][:k]]
    return 1.0 / freq[top]


def fit_spikem(volume, *, population=None, n_starts: int = 5, seed: int = 0,
               warm_start=None, target: str = "interval", fixed: dict | None = None,
               start: int = 0) -> EpiFitResult:
    """Fit SpikeM; ``fixed`` maps parameter names (see ``SPIKEM_NAMES``) to held values.

    Internally the kernel strength is fitted as ``beta_strength * population``
    so all coordinates are of order one.
    """
    from .models import SPIKEM_NAMES

    y, pop, cum, obs = _prepare(volume, population, target)
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(SPIKEM_NAMES)
    if unknown:
        raise ValueError(f"unknown SpikeM parameters {sorted(unknown)}")
    mask = np.array([0.0 if n in fixed else 1.0 for n in SPIKEM_NAMES])
    held = np.array([fixed.get(n, 0.0) for n in SPIKEM_NAMES], dtype=float)
    held[0] *= pop
    free = mask > 0.5
    aux = np.concatenate([[pop, cum, float(start)], mask, held, obs])
    box = [b for b, f in zip(_spikem_box(y), free) if f]
    bounds = [b for b, f in zip(SPIKEM_BOUNDS, free) if f]
    warm = None
    if warm_start is not None:
        if isinstance(warm_start, SpikeMParams):
            full = warm_start.vector()
            full[0] *= warm_start.population
            warm = full[free]
        else:
            warm = np.asarray(warm_start, dtype=float).copy()
            if free[0]:
                warm[0] *= pop
    # candidate periods come from the curve's own spectrum; the sinusoidal
    # terms otherwise trap LM at harmonics of the true period
    free_names = [n for n, f in zip(SPIKEM_NAMES, free) if f]
    period_cols = [free_names.index(n) for n in ("period_p", "period_q") if n in free_names]
    best, runs = _multistart(_spikem_residual, aux, box, bounds, n_starts=n_starts, seed=seed,
                             warm_start=warm, n_candidates=SPIKEM_CANDIDATES,
                             period_cols=period_cols, periods=dominant_periods(y))
    full = _spikem_full(best.params, aux)
    full[0] /= pop
    params = SpikeMParams(*(float(v) for v in full), population=pop, start=start)
    return EpiFitResult("SpikeM", params, best.sse, best.iterations, best.converged,
                        y.size, best.jtj_condition, runs)


# ---------------------------------------------------------------------------
# feature vector
# ---------------------------------------------------------------------------

@dataclass
class EpiFeatures:
    values: np.ndarray
    sse: np.ndarray
    converged: np.ndarray
    fits: dict[str, EpiFitResult | None] = field(default_factory=dict, repr=False)

    names = EPI_FEATURES

    def as_dict(self) -> dict[str, float]:
        return dict(zip(EPI_FEATURES, self.values.tolist()))


def fallback_features() -> EpiFeatures:
    return EpiFeatures(np.zeros(len(EPI_FEATURES)), np.full(3, np.nan),
                       np.zeros(3, dtype=bool), {"SIS": None, "SEIZ": None, "SpikeM": None})


def fit_epi_features(prefix, *, seed: int = 0, n_starts: int = 5, warm: EpiFeatures | None = None,
                     target: str = "interval") -> EpiFeatures:
    """Fit all three models to a volume prefix and return the 15 parameter features.

    A model whose fit fails contributes zeros with ``converged`` false; an
    all-zero prefix yields the full fallback vector.
    """
    y = np.asarray(prefix, dtype=float).ravel()
    if y.size < 2:
        raise InsufficientDataError("need at least 2 intervals to fit")
    out = fallback_features()
    if not np.any(y > 0):
        return out
    pop = POPULATION_FACTOR * float(y.sum())
    prev = warm.fits if warm is not None else {}

    def _warm(name, vec_fn):
        fit = prev.get(name)
        return None if fit is None else vec_fn(fit.params)

    try:
        sis = fit_sis(y, population=pop, n_starts=n_starts, seed=seed, target=target,
                      warm_start=_warm("SIS", lambda p: p.vector()))
        out.values[0:2] = [sis.params.beta, sis.params.alpha]
        out.sse[0], out.converged[0] = sis.residual_sse, sis.converged
        out.fits["SIS"] = sis
    except (FitInitError, NumericError):
        pass
    try:
        seiz = fit_seiz(y, population=pop, n_starts=n_starts, seed=seed + 1, target=target,
                        warm_start=_warm("SEIZ", lambda p: p.vector()))
        sp = seiz.params
        out.values[2:9] = [sp.beta, sp.b, sp.l, sp.p, sp.epsilon, sp.rho, rsi(sp)]
        out.sse[1], out.converged[1] = seiz.residual_sse, seiz.converged
        out.fits["SEIZ"] = seiz
    except (FitInitError, NumericError):
        pass
    try:
        spk = fit_spikem(y, population=pop, n_starts=n_starts, seed=seed + 2, target=target,
                         warm_start=_warm("SpikeM", lambda p: p))
        kp = spk.params
        out.values[9:15] = [kp.shift_p, kp.amp_p, kp.period_p, kp.shift_q, kp.amp_q, kp.period_q]
        out.sse[2], out.converged[2] = spk.residual_sse, spk.converged
        out.fits["SpikeM"] = spk
    except (FitInitError, NumericError):
        pass
    return out
