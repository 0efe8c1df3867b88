"""Categorical policy head: softmax, log-softmax, entropy, sampling."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax along the last axis."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def entropy(probs: np.ndarray) -> np.ndarray:
    """−Σ p ln p along the last axis (0 ln 0 taken as 0)."""
    safe = np.where(probs > 0.0, probs, 1.0)
    return -np.sum(probs * np.log(safe), axis=-1)


def sample_categorical(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray | int:
    """Inverse-CDF draw; one uniform per row, so a fixed rng state gives a fixed sequence."""
    p = np.atleast_2d(probs)
    cdf = np.cumsum(p, axis=-1)
    u = rng.random(p.shape[0])[:, None] * cdf[:, -1:]
    idx = np.minimum((cdf <= u).sum(axis=-1), p.shape[-1] - 1)
    return idx if np.ndim(probs) == 2 else int(idx[0])
