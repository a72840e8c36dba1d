"""JSON container for trained credibility models (bit-exact float64 round trip)."""
from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .network import PARAM_NAMES, CredibilityModel, Hyper
from .vocab import Vocabulary

FORMAT = "earlyrumor-credibility"
VERSION = 1


def _encode(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
    return {"shape": list(arr.shape), "data": base64.b64encode(data).decode("ascii")}


def _decode(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(obj["shape"])


def model_to_json(model: CredibilityModel) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "hyper": model.hyper.to_dict(),
        "vocab": {"min_count": model.vocab.min_count,
                  "tokens": sorted(model.vocab.token_to_id.items(), key=lambda kv: kv[1])},
        "params": {name: _encode(model.params[name]) for name in PARAM_NAMES},
        "loss_log": [float(x).hex() for x in model.loss_log],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> CredibilityModel:
    doc = json.loads(text)
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ValueError("not a credibility model file of a supported version")
    hyper = Hyper(**doc["hyper"])
    vocab = Vocabulary({tok: int(i) for tok, i in doc["vocab"]["tokens"]},
                       int(doc["vocab"]["min_count"]))
    params = {name: _decode(doc["params"][name]) for name in PARAM_NAMES}
    if params["embedding"].shape[0] != len(vocab):
        raise ValueError("embedding rows do not match the vocabulary size")
    return CredibilityModel(hyper, vocab, params, [float.fromhex(x) for x in doc["loss_log"]])


def save_model(model: CredibilityModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path) -> CredibilityModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
