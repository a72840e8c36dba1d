"""Bounded Levenberg-Marquardt least squares.

The iteration is written once in numba-compatible Python. Residual functions
that are themselves numba dispatchers run through a compiled copy of the same
loop; ordinary Python callables run through the interpreted one.

Residual functions have the signature ``residual(theta, aux) -> ndarray``
where ``aux`` is a flat float array of fixed data (observations, constants).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from numba.core.registry import CPUDispatcher

STATUS_MAXITER = 0
STATUS_FTOL = 1
STATUS_XTOL = 2
STATUS_ZERO = 3
STATUS_INIT = -1

_STATUS_TEXT = {
    STATUS_MAXITER: "iteration cap reached",
    STATUS_FTOL: "relative SSE improvement below ftol",
    STATUS_XTOL: "step norm below xtol",
    STATUS_ZERO: "residual is zero",
    STATUS_INIT: "residual not finite at init",
}


class FitInitError(ValueError):
    """The residual is not finite at the initial parameters."""


@dataclass
class LMResult:
    params: np.ndarray
    sse: float
    iterations: int
    converged: bool
    status: str
    sse_history: np.ndarray = field(repr=False)
    jtj_condition: float = float("nan")


def _numeric_jacobian(residual, theta, aux, m):
    p = theta.size
    jac = np.empty((m, p))
    work = theta.copy()
    for j in range(p):
        h = max(1e-6, 1e-4 * abs(theta[j]))
        work[j] = theta[j] + h
        r_hi = residual(work, aux)
        work[j] = theta[j] - h
        r_lo = residual(work, aux)
        work[j] = theta[j]
        for k in range(m):
            d = (r_hi[k] - r_lo[k]) / (2.0 * h)
            jac[k, j] = d if np.isfinite(d) else 0.0
    return jac


def _lm_loop(residual, jacobian, theta0, lo, hi, aux, max_iter, ftol, xtol, lam0):
    # One iteration = one Jacobian plus the inner damping search for an
    # improving step; rejected trials inside the search are not counted.
    theta = np.minimum(np.maximum(theta0, lo), hi)
    r = residual(theta, aux)
    sse = np.dot(r, r)
    history = np.empty(max_iter + 1)
    history[0] = sse
    if not np.isfinite(sse):
        return theta, sse, 0, STATUS_INIT, history[:1]
    n_hist = 1
    m = r.size
    p = theta.size
    lam = lam0
    iters = 0
    status = STATUS_MAXITER
    scale = np.ones(p)
    while iters < max_iter:
        if sse <= 1e-300:
            status = STATUS_ZERO
            break
        jac = jacobian(residual, theta, aux, m)
        jtj = jac.T @ jac
        grad = jac.T @ r
        dmax = 0.0
        for j in range(p):
            dmax = max(dmax, jtj[j, j])
        floor = 1e-12 * dmax if dmax > 0 else 1.0
        for j in range(p):
            scale[j] = max(jtj[j, j], floor)
        iters += 1
        accepted = False
        stop = False
        rel = 0.0
        step_norm = 0.0
        while True:
            system = jtj.copy()
            for j in range(p):
                system[j, j] += lam * scale[j]
            ok = True
            try:
                delta = np.linalg.solve(system, -grad)
            except Exception:  # singular normal equations: damp harder
                ok = False
                delta = np.zeros(p)
            if ok and np.all(np.isfinite(delta)):
                trial = np.minimum(np.maximum(theta + delta, lo), hi)
                step_norm = np.sqrt(np.sum((trial - theta) ** 2))
                r_new = residual(trial, aux)
                sse_new = np.dot(r_new, r_new)
                if np.isfinite(sse_new) and sse_new < sse:
                    rel = (sse - sse_new) / sse
                    theta = trial
                    r = r_new
                    sse = sse_new
                    history[n_hist] = sse
                    n_hist += 1
                    lam = max(lam / 10.0, 1e-12)
                    accepted = True
                    break
                if step_norm < xtol:
                    stop = True
                    break
            lam *= 10.0
            if lam > 1e20:
                stop = True
                break
        if stop:
            status = STATUS_XTOL
            break
        if accepted:
            if rel < ftol:
                status = STATUS_FTOL
                break
            if step_norm < xtol:
                status = STATUS_XTOL
                break
    return theta, sse, iters, status, history[:n_hist]


_jacobian_jit = numba.njit(_numeric_jacobian)
_lm_loop_jit = numba.njit(_lm_loop)


def _finish(residual_call, theta, sse, iters, status, history) -> LMResult:
    cond = float("nan")
    if status != STATUS_INIT:
        try:
            jac = residual_call(theta)
            cond = float(np.linalg.cond(jac.T @ jac))
        except (np.linalg.LinAlgError, ValueError):
            pass
    return LMResult(
        params=np.asarray(theta, dtype=float),
        sse=float(sse),
        iterations=int(iters),
        converged=status in (STATUS_FTOL, STATUS_XTOL, STATUS_ZERO),
        status=_STATUS_TEXT[status],
        sse_history=np.asarray(history, dtype=float),
        jtj_condition=cond,
    )


def levenberg_marquardt(residual_fn, init, bounds=None, *, aux=None, max_iter: int = 200,
                        ftol: float = 1e-9, xtol: float = 1e-10,
                        lambda0: float = 1e-3) -> LMResult:
    """Minimise ``sum(residual_fn(theta)**2)`` subject to box bounds.

    Parameters
    ----------
    residual_fn : callable
        ``residual_fn(theta)`` for plain Python callables, or a numba-jitted
        ``residual_fn(theta, aux)``.
    init : array_like
        Starting parameters; projected onto the bounds first.
    bounds : sequence of (lo, hi) pairs, optional
        Per-parameter limits; ``None`` or infinite entries leave a side open.
    aux : array_like, optional
        Fixed data forwarded to jitted residuals.

    Damping starts at ``lambda0`` and is multiplied by 10 on rejected steps and
    divided by 10 on accepted ones; the Jacobian uses central differences with
    step ``max(1e-6, 1e-4*|theta|)``. The returned parameters are the best
    seen, since only improving steps are accepted.

    Raises
    ------
    FitInitError
        If the residual is not finite at the (projected) initial parameters.
    """
    theta0 = np.asarray(init, dtype=float).ravel().copy()
    p = theta0.size
    lo = np.full(p, -np.inf)
    hi = np.full(p, np.inf)
    if bounds is not None:
        for j, (a, b) in enumerate(bounds):
            lo[j] = -np.inf if a is None else float(a)
            hi[j] = np.inf if b is None else float(b)
    aux_arr = np.zeros(1) if aux is None else np.asarray(aux, dtype=float)

    if isinstance(residual_fn, CPUDispatcher):
        out = _lm_loop_jit(residual_fn, _jacobian_jit, theta0, lo, hi, aux_arr,
                           max_iter, ftol, xtol, lambda0)

        def jac_at(theta):
            m = residual_fn(theta, aux_arr).size
            return _jacobian_jit(residual_fn, theta, aux_arr, m)
    else:
        def wrapped(theta, _aux):
            return np.asarray(residual_fn(theta), dtype=float).ravel()

        out = _lm_loop(wrapped, _numeric_jacobian, theta0, lo, hi, aux_arr,
                       max_iter, ftol, xtol, lambda0)

        def jac_at(theta):
            m = wrapped(theta, aux_arr).size
            return _numeric_jacobian(wrapped, theta, aux_arr, m)

    theta, sse, iters, status, history = out
    if status == STATUS_INIT:
        raise FitInitError("residual is not finite at the initial parameters")
    return _finish(jac_at, theta, sse, iters, status, history)
