"""Forward simulators for the SIS, SEIZ and periodic-shock SpikeM diffusion models.

All simulators return a per-interval tweet volume: the number of newly
"infected" users (users posting about the event) in each unit interval.
The compartment models are integrated with fixed-step RK4; the cumulative
inflow into the infected compartment is carried as an extra state so the
per-interval volume is exact to integrator precision.

The numba kernels take flat parameter vectors so the fitter can evaluate
them without Python overhead.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numba
import numpy as np

RK4_SUBSTEPS = 2


class NumericError(ArithmeticError):
    """A simulation produced a non-finite value."""


@dataclass(frozen=True)
class SisParams:
    beta: float
    alpha: float
    population: float

    def vector(self) -> np.ndarray:
        return np.array([self.beta, self.alpha])


@dataclass(frozen=True)
class SeizParams:
    beta: float
    b: float
    l: float  # noqa: E741  (name follows the standard SEIZ notation)
    p: float
    epsilon: float
    rho: float
    population: float

    def vector(self) -> np.ndarray:
        return np.array([self.beta, self.b, self.l, self.p, self.epsilon, self.rho])


@dataclass(frozen=True)
class SpikeMParams:
    """SpikeM with an activity modulation p(n) and a periodic external shock.

    ``beta_strength`` is the raw infectiveness of the power-law kernel, so its
    natural scale is ``1 / population``.
    """

    beta_strength: float
    shock: float
    epsilon: float
    period_p: float
    amp_p: float
    shift_p: float
    period_q: float
    amp_q: float
    shift_q: float
    population: float
    start: int = 0

    def vector(self) -> np.ndarray:
        return np.array(astuple(self)[:9], dtype=float)


SIS_NAMES = ("beta", "alpha")
SEIZ_NAMES = ("beta", "b", "l", "p", "epsilon", "rho")
SPIKEM_NAMES = ("beta_strength", "shock", "epsilon", "period_p", "amp_p",
                "shift_p", "period_q", "amp_q", "shift_q")


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _sis_rhs(s, i, beta, alpha, n_pop):
    inf = beta * s * i / n_pop
    return -inf, inf - alpha * i, inf


@numba.njit(cache=True)
def sis_volume(beta, alpha, n_pop, steps, substeps=RK4_SUBSTEPS):
    out = np.empty(steps)
    s = n_pop - 1.0
    i = 1.0
    h = 1.0 / substeps
    for t in range(steps):
        acc = 0.0
        for _ in range(substeps):
            ds1, di1, dc1 = _sis_rhs(s, i, beta, alpha, n_pop)
            ds2, di2, dc2 = _sis_rhs(s + 0.5 * h * ds1, i + 0.5 * h * di1, beta, alpha, n_pop)
            ds3, di3, dc3 = _sis_rhs(s + 0.5 * h * ds2, i + 0.5 * h * di2, beta, alpha, n_pop)
            ds4, di4, dc4 = _sis_rhs(s + h * ds3, i + h * di3, beta, alpha, n_pop)
            s += h / 6.0 * (ds1 + 2.0 * ds2 + 2.0 * ds3 + ds4)
            i += h / 6.0 * (di1 + 2.0 * di2 + 2.0 * di3 + di4)
            acc += h / 6.0 * (dc1 + 2.0 * dc2 + 2.0 * dc3 + dc4)
        out[t] = acc
    return out


@numba.njit(cache=True)
def _seiz_rhs(s, e, i, z, beta, b, l, p, eps, rho, n_pop):
    si = beta * s * i / n_pop
    sz = b * s * z / n_pop
    ei = rho * e * i / n_pop
    ds = -si - sz
    de = (1.0 - p) * si + (1.0 - l) * sz - ei - eps * e
    di = p * si + ei + eps * e
    dz = l * sz
    return ds, de, di, dz, di


@numba.njit(cache=True)
def seiz_states(beta, b, l, p, eps, rho, n_pop, steps, i0, z0, substeps=RK4_SUBSTEPS):
    """Return (volume, states) with states[t] = (S, E, I, Z) at the start of interval t+1."""
    out = np.empty(steps)
    states = np.empty((steps + 1, 4))
    s = n_pop - i0 - z0
    e = 0.0
    i = i0
    z = z0
    states[0, 0] = s
    states[0, 1] = e
    states[0, 2] = i
    states[0, 3] = z
    h = 1.0 / substeps
    for t in range(steps):
        acc = 0.0
        for _ in range(substeps):
            k1 = _seiz_rhs(s, e, i, z, beta, b, l, p, eps, rho, n_pop)
            k2 = _seiz_rhs(s + 0.5 * h * k1[0], e + 0.5 * h * k1[1], i + 0.5 * h * k1[2],
                           z + 0.5 * h * k1[3], beta, b, l, p, eps, rho, n_pop)
            k3 = _seiz_rhs(s + 0.5 * h * k2[0], e + 0.5 * h * k2[1], i + 0.5 * h * k2[2],
                           z + 0.5 * h * k2[3], beta, b, l, p, eps, rho, n_pop)
            k4 = _seiz_rhs(s + h * k3[0], e + h * k3[1], i + h * k3[2], z + h * k3[3],
                           beta, b, l, p, eps, rho, n_pop)
            s += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            e += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            i += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            z += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            acc += h / 6.0 * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])
        out[t] = acc
        states[t + 1, 0] = s
        states[t + 1, 1] = e
        states[t + 1, 2] = i
        states[t + 1, 3] = z
    return out, states


@numba.njit(cache=True)
def seiz_volume(beta, b, l, p, eps, rho, n_pop, steps, i0, z0):
    return seiz_states(beta, b, l, p, eps, rho, n_pop, steps, i0, z0)[0]


@numba.njit(cache=True)
def _modulation(n, period, amp, shift):
    return 1.0 - 0.5 * amp * (math.sin(2.0 * math.pi * (n + shift) / period) + 1.0)


@numba.njit(cache=True)
def spikem_volume(beta, shock, eps, pp, pa, ps, qp, qa, qs, start, n_pop, steps):
    # db[m] holds ΔB(m); ΔB(0) = 0 and the curve is ΔB(1..steps).
    db = np.zeros(steps + 1)
    ext = np.zeros(steps + 1)
    for n in range(steps + 1):
        if n >= start:
            ext[n] = shock * max(_modulation(n, qp, qa, qs), 0.0)
    decay = np.empty(steps + 2)
    for tau in range(1, steps + 2):
        decay[tau] = tau ** -1.5
    pool = n_pop
    for n in range(steps):
        acc = 0.0
        for t in range(start, n + 1):
            acc += (db[t] + ext[t]) * decay[n + 1 - t]
        val = _modulation(n, pp, pa, ps) * (pool * beta * acc + eps)
        if val > pool:
            val = pool
        db[n + 1] = val
        pool -= val
    return db[1:].copy()


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------

def _checked(curve: np.ndarray, model: str) -> np.ndarray:
    if not np.all(np.isfinite(curve)):
        raise NumericError(f"{model} simulation produced non-finite volume")
    return curve


def simulate_sis(params: SisParams, steps: int) -> np.ndarray:
    """Per-interval new-infection volume of the Twitter-adapted SIS model.

    dS/dt = -beta*S*I/N, dI/dt = beta*S*I/N - alpha*I with I(0)=1. Users
    leaving I do not return to S.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return _checked(sis_volume(float(params.beta), float(params.alpha),
                               float(params.population), int(steps)), "SIS")


def simulate_seiz(params: SeizParams, steps: int, *, i0: float = 1.0, z0: float = 1.0,
                  return_states: bool = False):
    """Per-interval inflow into the infected compartment of the SEIZ model.

    The skeptic compartment is seeded with ``z0`` users (default 1); with
    Z(0)=0 the skeptic terms stay identically zero and b, l cannot act.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    vol, states = seiz_states(float(params.beta), float(params.b), float(params.l),
                              float(params.p), float(params.epsilon), float(params.rho),
                              float(params.population), int(steps), float(i0), float(z0))
    _checked(vol, "SEIZ")
    if not np.all(np.isfinite(states)):
        raise NumericError("SEIZ simulation produced non-finite state")
    return (vol, states) if return_states else vol


def simulate_spikem(params: SpikeMParams, steps: int) -> np.ndarray:
    """Volume ΔB(1..steps) of SpikeM with power-law decay beta*tau^-1.5.

    The un-infected pool starts at ``population`` and each step's volume is
    capped by what is left of it.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    v = params.vector()
    return _checked(spikem_volume(*v, int(params.start), float(params.population),
                                  int(steps)), "SpikeM")


def rsi(params: SeizParams) -> float:
    """Ratio of inflow into the exposed compartment over its outflow rates."""
    denom = params.rho + params.epsilon
    if denom <= 0:
        raise ZeroDivisionError("R_SI undefined when rho + epsilon == 0")
    return ((1.0 - params.p) * params.beta + (1.0 - params.l) * params.b) / denom
