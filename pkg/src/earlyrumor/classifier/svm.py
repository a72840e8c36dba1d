"""RBF-kernel SVM trained by SMO with second-order working-set selection."""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass

import numba
import numpy as np

from .data import check_xy
from .forest import SingleClassError

TAU = 1e-12
MAX_COLUMN_STD = 10.0


class UnnormalizedDataError(ValueError):
    """Some column has a standard deviation above the accepted limit."""


class SvmConvergenceError(RuntimeError):
    """SMO hit its iteration cap before the KKT gap closed."""

    def __init__(self, iterations: int, gap: float, n_violating: int):
        self.iterations, self.gap, self.n_violating = iterations, gap, n_violating
        super().__init__(f"SMO did not converge in {iterations} iterations: KKT gap {gap:.3g}, "
                         f"{n_violating} violating points")


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray      # alpha_i * y_i with y in {-1, +1}
    alphas: np.ndarray         # alpha_i of the support vectors, each in (0, C]
    bias: float
    gamma: float
    C: float
    iterations: int = 0
    kkt_gap: float = 0.0
    seed: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def predict(self, X) -> np.ndarray:
        # the rumor class (1) sits on the positive side
        return (self.decision_function(X) >= 0.0).astype(np.int64)


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)[:, None]
    bb = np.einsum("ij,ij->i", B, B)[None, :]
    d2 = np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


@numba.njit(cache=True)
def _smo(K, y, C, eps, max_iter):
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    gap = np.inf
    while it < max_iter:
        # i: maximal violating index in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -G[t] >= gmax:
                    gmax = -G[t]
                    i = t
            else:
                if alpha[t] > 0 and G[t] >= gmax:
                    gmax = G[t]
                    i = t
        # j: second-order choice in I_low
        gmax2 = -np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if y[t] > 0:
                if alpha[t] > 0:
                    diff = gmax + G[t]
                    if G[t] >= gmax2:
                        gmax2 = G[t]
                    if diff > 0 and i >= 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(diff * diff) / quad
                        if obj <= best:
                            best = obj
                            j = t
            else:
                if alpha[t] < C:
                    diff = gmax - G[t]
                    if -G[t] >= gmax2:
                        gmax2 = -G[t]
                    if diff > 0 and i >= 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(diff * diff) / quad
                        if obj <= best:
                            best = obj
                            j = t
        gap = gmax + gmax2
        if gap < eps or j < 0:
            break
        it += 1
        qij = y[i] * y[j] * K[i, j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        dai = alpha[i] - ai
        daj = alpha[j] - aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * dai + y[j] * K[t, j] * daj)
    # offset from free vectors, else the midpoint of the feasible interval
    n_free = 0
    acc = 0.0
    ub = np.inf
    lb = -np.inf
    for t in range(n):
        yg = y[t] * G[t]
        if 0 < alpha[t] < C:
            n_free += 1
            acc += yg
        elif (alpha[t] >= C and y[t] < 0) or (alpha[t] <= 0 and y[t] > 0):
            ub = min(ub, yg)
        else:
            lb = max(lb, yg)
    rho = acc / n_free if n_free > 0 else 0.5 * (ub + lb)
    return alpha, rho, it, gap


def train_svm_rbf(X, y, C: float = 3.0, gamma: float = 0.2, seed: int = 0, *,
                  tol: float = 1e-3, max_iter: int | None = None) -> SvmModel:
    """Soft-margin RBF SVM on standardised features (labels 1 rumor, 0 news).

    The solver is deterministic; ``seed`` is only recorded.
    """
    X, y = check_xy(X, y)
    if np.unique(y).size < 2:
        raise SingleClassError("SVM needs both classes")
    std = X.std(axis=0)
    if np.any(std > MAX_COLUMN_STD):
        col = int(np.argmax(std))
        raise UnnormalizedDataError(f"column {col} has std {std[col]:.3g} > {MAX_COLUMN_STD}; "
                                    "standardise features first")
    ys = np.where(y == 1, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    cap = max(100_000, 100 * X.shape[0]) if max_iter is None else int(max_iter)
    alpha, rho, it, gap = _smo(K, ys, float(C), float(tol), cap)
    if gap >= tol:
        f = K @ (alpha * ys) - rho
        margin = ys * f
        bad = ((alpha < C) & (margin < 1 - tol)) | ((alpha > 0) & (margin > 1 + tol))
        raise SvmConvergenceError(int(it), float(gap), int(bad.sum()))
    sv = alpha > 0
    return SvmModel(X[sv].copy(), (alpha * ys)[sv], alpha[sv], float(-rho), float(gamma),
                    float(C), int(it), float(gap), int(seed))


def _enc(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _dec(text: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<f8").astype(np.float64)


def svm_to_json(model: SvmModel) -> str:
    doc = {"format": "earlyrumor-svm", "version": 1,
           "shape": list(model.support_vectors.shape),
           "support_vectors": _enc(model.support_vectors), "dual_coef": _enc(model.dual_coef),
           "alphas": _enc(model.alphas), "bias": model.bias.hex(), "gamma": model.gamma.hex(),
           "C": model.C.hex(), "iterations": model.iterations, "kkt_gap": model.kkt_gap.hex(),
           "seed": model.seed}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def svm_from_json(text: str) -> SvmModel:
    doc = json.loads(text)
    if doc.get("format") != "earlyrumor-svm":
        raise ValueError("not an SVM model file")
    return SvmModel(_dec(doc["support_vectors"]).reshape(doc["shape"]), _dec(doc["dual_coef"]),
                    _dec(doc["alphas"]), float.fromhex(doc["bias"]), float.fromhex(doc["gamma"]),
                    float.fromhex(doc["C"]), int(doc["iterations"]),
                    float.fromhex(doc["kkt_gap"]), int(doc["seed"]))
