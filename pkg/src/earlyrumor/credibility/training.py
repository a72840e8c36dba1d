"""Mini-batch SGD training, scoring and a finite-difference gradient check."""
from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from .network import (
    NEWS,
    PARAM_NAMES,
    RUMOR,
    CredibilityModel,
    CredibilityNumericError,
    CredibilityPrediction,
    Hyper,
    backward,
    forward,
    init_params,
    nll,
    predict_proba,
)
from .vocab import PAD_ID, Vocabulary, build_vocabulary, encode_batch

log = logging.getLogger(__name__)

_LABELS = {"rumor": RUMOR, "news": NEWS}


class SingleClassError(ValueError):
    """The training data holds only one label."""


def label_index(label) -> int:
    """``'rumor'``/``'news'`` or a class index (0 rumor, 1 news)."""
    if isinstance(label, str):
        try:
            return _LABELS[label.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown credibility label {label!r}") from None
    value = int(label)
    if value not in (RUMOR, NEWS):
        raise ValueError(f"class index must be 0 or 1, got {label!r}")
    return value


def loss(prediction, label) -> float:
    """Negative log-likelihood of ``label`` for one prediction or a batch of ``p_news``."""
    p_news = np.atleast_1d(np.asarray(
        [getattr(p, "p_news", p) for p in prediction] if isinstance(prediction, (list, tuple))
        else getattr(prediction, "p_news", prediction), dtype=float))
    labels = np.atleast_1d(np.asarray(
        [label_index(v) for v in label] if isinstance(label, (list, tuple)) else label_index(label)))
    probs = np.stack([1.0 - p_news, p_news], axis=1)
    if np.any(probs[np.arange(len(labels)), labels] < 1e-12):
        log.debug("true-class probability below 1e-12 clamped in loss")
    return nll(probs, labels)


def train_credibility(dataset: Sequence[tuple[str, object]], hyper: Hyper | None = None,
                      seed: int | None = None, vocab: Vocabulary | None = None) -> CredibilityModel:
    """Train the CNN+LSTM model with mini-batch SGD.

    ``seed`` overrides ``hyper.seed``. The per-epoch mean training loss is
    stored in ``loss_log``.
    """
    hyper = hyper or Hyper()
    if seed is not None:
        hyper = Hyper(**{**hyper.to_dict(), "seed": int(seed)})
    texts = [t for t, _ in dataset]
    labels = np.array([label_index(lab) for _, lab in dataset], dtype=np.int64)
    if len(set(labels.tolist())) < 2:
        raise SingleClassError("credibility training needs both rumor and news examples")
    vocab = vocab or build_vocabulary(texts, hyper.min_count)
    ids = encode_batch(texts, vocab, hyper.seq_len)
    rng = np.random.default_rng(hyper.seed)
    model = CredibilityModel(hyper, vocab, init_params(hyper, len(vocab), rng))
    lr = hyper.learning_rate
    n = len(texts)
    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, hyper.batch_size):
            idx = order[start:start + hyper.batch_size]
            try:
                probs, cache = forward(model.params, hyper, ids[idx], train_mode=True, rng=rng)
            except CredibilityNumericError as exc:
                raise CredibilityNumericError(exc.layer, f"diverged in epoch {epoch}") from None
            batch_loss = nll(probs, labels[idx])
            grads = backward(model.params, hyper, probs, labels[idx], cache)
            for name in PARAM_NAMES:
                model.params[name] -= lr * grads[name]
            total += batch_loss * len(idx)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise CredibilityNumericError("loss", f"diverged in epoch {epoch}")
        model.loss_log.append(epoch_loss)
    return model


def score_texts(model: CredibilityModel, texts: Iterable[str]) -> np.ndarray:
    """``p_news`` for each text."""
    ids = encode_batch(list(texts), model.vocab, model.hyper.seq_len)
    return predict_proba(model, ids) if len(ids) else np.zeros(0)


def predict(model: CredibilityModel, text: str) -> CredibilityPrediction:
    return CredibilityPrediction(float(score_texts(model, [text])[0]))


def training_accuracy(model: CredibilityModel, dataset: Sequence[tuple[str, object]]) -> float:
    p = score_texts(model, [t for t, _ in dataset])
    y = np.array([label_index(lab) for _, lab in dataset])
    return float(np.mean((p >= 0.5).astype(int) == y))


def gradient_check(model: CredibilityModel, sample: Sequence[tuple[str, object]],
                   epsilon: float = 1e-6) -> dict[str, float]:
    """Relative error between analytic and central-difference gradients per parameter array.

    Dropout is off. The error of an array is ``|g_a - g_n| / (|g_a| + |g_n|)``
    in the Euclidean norm (0 when both vanish); ``max`` holds the largest.
    """
    hyper = model.hyper
    ids = encode_batch([t for t, _ in sample], model.vocab, hyper.seq_len)
    labels = np.array([label_index(lab) for _, lab in sample], dtype=np.int64)
    params = {k: v.copy() for k, v in model.params.items()}
    probs, cache = forward(params, hyper, ids)
    analytic = backward(params, hyper, probs, labels, cache)
    errors = {}
    for name in PARAM_NAMES:
        theta = params[name]
        numeric = np.zeros_like(theta)
        flat, num_flat = theta.reshape(-1), numeric.reshape(-1)
        for j in range(flat.size):
            if name == "embedding" and j // theta.shape[1] == PAD_ID:
                continue  # the padding row is masked out of the network
            old = flat[j]
            flat[j] = old + epsilon
            up = nll(forward(params, hyper, ids)[0], labels)
            flat[j] = old - epsilon
            down = nll(forward(params, hyper, ids)[0], labels)
            flat[j] = old
            num_flat[j] = (up - down) / (2.0 * epsilon)
        denom = np.linalg.norm(analytic[name]) + np.linalg.norm(numeric)
        errors[name] = 0.0 if denom == 0.0 else float(
            np.linalg.norm(analytic[name] - numeric) / denom)
    errors["max"] = max(errors.values())
    return errors
