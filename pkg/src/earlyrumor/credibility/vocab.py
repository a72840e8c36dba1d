"""Token vocabulary and fixed-length tweet encodings."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..features.blocks import tokenize

PAD_ID = 0
UNK_ID = 1


@dataclass(frozen=True)
class Vocabulary:
    token_to_id: dict[str, int]
    min_count: int = 1

    def __len__(self) -> int:
        return len(self.token_to_id) + 2

    @property
    def size(self) -> int:
        return len(self)

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)


def build_vocabulary(corpus: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Ids 0 (padding) and 1 (unknown) are reserved; tokens with count >= ``min_count``
    follow in order of decreasing frequency, then lexicographically."""
    counts: Counter[str] = Counter()
    n_texts = 0
    for text in corpus:
        n_texts += 1
        counts.update(tokenize(text))
    if n_texts == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted((tok for tok, c in counts.items() if c >= min_count),
                  key=lambda tok: (-counts[tok], tok))
    return Vocabulary({tok: i + 2 for i, tok in enumerate(kept)}, min_count)


def tokenize_and_pad(text: str, vocab: Vocabulary, length: int = 40) -> np.ndarray:
    """Token ids of ``text`` truncated to ``length`` or right-padded with 0."""
    if length < 1:
        raise ValueError("length must be >= 1")
    ids = [vocab.id(tok) for tok in tokenize(text)[:length]]
    out = np.zeros(length, dtype=np.int64)
    out[:len(ids)] = ids
    return out


def encode_batch(texts: Iterable[str], vocab: Vocabulary, length: int = 40) -> np.ndarray:
    rows = [tokenize_and_pad(t, vocab, length) for t in texts]
    return np.stack(rows) if rows else np.zeros((0, length), dtype=np.int64)
