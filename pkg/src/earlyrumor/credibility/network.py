"""CNN + LSTM tweet classifier: parameters, batched forward pass and backpropagation.

Layout: embedding -> tanh convolution over windows of ``h`` tokens ->
non-overlapping max pooling over time -> LSTM over the pooled sequence ->
(dropout on the last hidden state while training) -> softmax over
``(rumor, news)``. Class index 1 is news.

The LSTM state is frozen after the last pooled step that still covers a real
token, so trailing padding never dilutes the readout.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .vocab import PAD_ID, Vocabulary

RUMOR, NEWS = 0, 1
PROB_FLOOR = 1e-12
PARAM_NAMES = ("embedding", "conv_w", "conv_b", "lstm_wx", "lstm_wh", "lstm_b", "out_w", "out_b")


class CredibilityNumericError(ArithmeticError):
    """An activation or the loss became non-finite."""

    def __init__(self, layer: str, detail: str = ""):
        self.layer = layer
        super().__init__(f"non-finite values in layer {layer!r}{': ' + detail if detail else ''}")


@dataclass(frozen=True)
class Hyper:
    embed_dim: int = 50
    seq_len: int = 40
    window: int = 3
    n_filters: int = 64
    hidden: int = 100
    pool: int = 2
    dropout: float = 0.25
    learning_rate: float = 0.5
    batch_size: int = 32
    epochs: int = 30
    init_scale: float = 0.05
    weight_init: str = "glorot"
    min_count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.seq_len < self.window:
            raise ValueError("seq_len must be >= window")
        if (self.seq_len - self.window + 1) // self.pool < 1:
            raise ValueError("pooling leaves no time steps for the LSTM")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.weight_init not in ("glorot", "uniform"):
            raise ValueError("weight_init must be 'glorot' or 'uniform'")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CredibilityPrediction:
    p_news: float

    @property
    def p_rumor(self) -> float:
        return 1.0 - self.p_news


@dataclass
class CredibilityModel:
    hyper: Hyper
    vocab: Vocabulary
    params: dict[str, np.ndarray]
    loss_log: list[float] = field(default_factory=list)

    def copy(self) -> "CredibilityModel":
        return CredibilityModel(self.hyper, self.vocab,
                                {k: v.copy() for k, v in self.params.items()}, list(self.loss_log))


def init_params(hyper: Hyper, vocab_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Seeded uniform initialisation; the padding embedding row is zero.

    Embeddings and biases are drawn from ``[-init_scale, init_scale]``. Weight
    matrices use the same range with ``weight_init='uniform'``, or the
    fan-in/fan-out scaled range ``sqrt(6 / (fan_in + fan_out))`` with
    ``'glorot'`` (default), which keeps activations away from zero.
    """
    k, h, f, d = hyper.embed_dim, hyper.window, hyper.n_filters, hyper.hidden
    s = hyper.init_scale
    shapes = {
        "embedding": (vocab_size, k),
        "conv_w": (h * k, f),
        "conv_b": (f,),
        "lstm_wx": (f, 4 * d),
        "lstm_wh": (d, 4 * d),
        "lstm_b": (4 * d,),
        "out_w": (d, 2),
        "out_b": (2,),
    }
    params = {}
    for name in PARAM_NAMES:
        shape = shapes[name]
        lim = s
        if hyper.weight_init == "glorot" and name in ("conv_w", "lstm_wx", "lstm_wh", "out_w"):
            lim = float(np.sqrt(6.0 / (shape[0] + shape[1])))
        params[name] = rng.uniform(-lim, lim, shape)
    params["embedding"][PAD_ID] = 0.0
    return params


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _finite(layer: str, x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise CredibilityNumericError(layer)


def forward(params: dict[str, np.ndarray], hyper: Hyper, ids: np.ndarray, *,
            train_mode: bool = False, rng: np.random.Generator | None = None):
    """Class probabilities ``(B, 2)`` for a batch of encodings, plus a cache for backprop."""
    ids = np.atleast_2d(ids)
    b, L = ids.shape
    k, h, d, pool = hyper.embed_dim, hyper.window, hyper.hidden, hyper.pool
    mask = (ids != PAD_ID)[:, :, None]
    x = params["embedding"][ids] * mask
    win = sliding_window_view(x, h, axis=1)            # (B, C, k, h)
    win = win.transpose(0, 1, 3, 2).reshape(b, L - h + 1, h * k)
    conv = np.tanh(win @ params["conv_w"] + params["conv_b"])
    _finite("convolution", conv)
    steps = conv.shape[1] // pool
    grouped = conv[:, :steps * pool].reshape(b, steps, pool, -1)
    arg = grouped.argmax(axis=2)
    pooled = np.take_along_axis(grouped, arg[:, :, None, :], axis=2)[:, :, 0, :]
    # conv windows starting on a real token, then pooled steps covering them
    n_tok = mask[:, :, 0].sum(axis=1)
    n_valid = np.minimum(-(-np.minimum(n_tok, conv.shape[1]) // pool), steps)
    live = (np.arange(steps)[:, None] < n_valid[None, :])[:, :, None].astype(float)

    hs = np.zeros((steps + 1, b, d))
    cs = np.zeros((steps + 1, b, d))
    gates = np.zeros((steps, b, 4 * d))
    for t in range(steps):
        z = pooled[:, t] @ params["lstm_wx"] + hs[t] @ params["lstm_wh"] + params["lstm_b"]
        g = np.empty_like(z)
        g[:, :3 * d] = _sigmoid(z[:, :3 * d])
        g[:, 3 * d:] = np.tanh(z[:, 3 * d:])
        c_new = g[:, d:2 * d] * cs[t] + g[:, :d] * g[:, 3 * d:]
        h_new = g[:, 2 * d:3 * d] * np.tanh(c_new)
        m = live[t]
        cs[t + 1] = m * c_new + (1.0 - m) * cs[t]
        hs[t + 1] = m * h_new + (1.0 - m) * hs[t]
        gates[t] = g
    _finite("lstm", hs[-1])

    keep = None
    h_last = hs[-1]
    if train_mode and hyper.dropout > 0.0:
        if rng is None:
            raise ValueError("train_mode with dropout needs an rng")
        keep = (rng.random(h_last.shape) >= hyper.dropout) / (1.0 - hyper.dropout)
        h_last = h_last * keep
    logits = h_last @ params["out_w"] + params["out_b"]
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    _finite("softmax", probs)
    cache = dict(ids=ids, mask=mask, win=win, conv=conv, arg=arg, pooled=pooled, hs=hs, cs=cs,
                 gates=gates, keep=keep, h_last=h_last, steps=steps, live=live)
    return probs, cache


def nll(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true class, with probabilities floored at 1e-12."""
    p_true = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(p_true, PROB_FLOOR))))


def backward(params: dict[str, np.ndarray], hyper: Hyper, probs: np.ndarray,
             labels: np.ndarray, cache: dict) -> dict[str, np.ndarray]:
    """Gradients of the mean NLL with respect to every parameter array."""
    b = probs.shape[0]
    k, h, d, pool = hyper.embed_dim, hyper.window, hyper.hidden, hyper.pool
    grads = {}
    dlogits = probs.copy()
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b
    grads["out_w"] = cache["h_last"].T @ dlogits
    grads["out_b"] = dlogits.sum(axis=0)
    dh = dlogits @ params["out_w"].T
    if cache["keep"] is not None:
        dh = dh * cache["keep"]

    hs, cs, gates, pooled = cache["hs"], cache["cs"], cache["gates"], cache["pooled"]
    steps, live = cache["steps"], cache["live"]
    dwx = np.zeros_like(params["lstm_wx"])
    dwh = np.zeros_like(params["lstm_wh"])
    dlb = np.zeros_like(params["lstm_b"])
    dpooled = np.zeros_like(pooled)
    dc = np.zeros((b, d))
    for t in range(steps - 1, -1, -1):
        g = gates[t]
        m = live[t]
        i, f, o, gg = g[:, :d], g[:, d:2 * d], g[:, 2 * d:3 * d], g[:, 3 * d:]
        c_new = f * cs[t] + i * gg
        tc = np.tanh(c_new)
        # frozen steps pass the incoming gradient straight through
        dh_skip, dc_skip = (1.0 - m) * dh, (1.0 - m) * dc
        dh, dc = m * dh, m * dc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = np.empty_like(g)
        dz[:, :d] = dc * gg * i * (1.0 - i)
        dz[:, d:2 * d] = dc * cs[t] * f * (1.0 - f)
        dz[:, 2 * d:3 * d] = dh * tc * o * (1.0 - o)
        dz[:, 3 * d:] = dc * i * (1.0 - gg * gg)
        dwx += pooled[:, t].T @ dz
        dwh += hs[t].T @ dz
        dlb += dz.sum(axis=0)
        dpooled[:, t] = dz @ params["lstm_wx"].T
        dh = dz @ params["lstm_wh"].T + dh_skip
        dc = dc * f + dc_skip
    grads["lstm_wx"], grads["lstm_wh"], grads["lstm_b"] = dwx, dwh, dlb

    conv = cache["conv"]
    dconv = np.zeros_like(conv)
    grouped = dconv[:, :steps * pool].reshape(b, steps, pool, -1)
    np.put_along_axis(grouped, cache["arg"][:, :, None, :], dpooled[:, :, None, :], axis=2)
    dconv[:, :steps * pool] = grouped.reshape(b, steps * pool, -1)
    da = dconv * (1.0 - conv * conv)
    win = cache["win"]
    grads["conv_w"] = win.reshape(-1, h * k).T @ da.reshape(-1, da.shape[-1])
    grads["conv_b"] = da.sum(axis=(0, 1))
    dwin = da @ params["conv_w"].T                      # (B, C, h*k)
    ids = cache["ids"]
    n_win = dwin.shape[1]
    dx = np.zeros((b, ids.shape[1], k))
    for j in range(h):
        dx[:, j:j + n_win] += dwin[:, :, j * k:(j + 1) * k]
    dx *= cache["mask"]
    demb = np.zeros_like(params["embedding"])
    np.add.at(demb, ids.ravel(), dx.reshape(-1, k))
    demb[PAD_ID] = 0.0
    grads["embedding"] = demb
    return grads


def predict_proba(model: CredibilityModel, ids: np.ndarray, batch: int = 1024) -> np.ndarray:
    """``p_news`` for each encoded tweet (inference mode, no dropout)."""
    ids = np.atleast_2d(ids)
    out = np.empty(ids.shape[0])
    for start in range(0, ids.shape[0], batch):
        probs, _ = forward(model.params, model.hyper, ids[start:start + batch])
        out[start:start + batch] = probs[:, NEWS]
    return out
