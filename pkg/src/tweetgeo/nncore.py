"""Minimal numeric kernel: ReLU, stable softmax, cross-entropy, inverted
dropout, and Adam. Forward/backward pairs are plain functions over numpy
arrays; the caller wires the chain rule.

Parameters live in float32 by default; every op preserves the dtype it is
given so a float64 twin of a model can be used for finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_FLOOR = 1e-12


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    # subgradient at exactly 0 is 0
    return upstream * (x > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Probabilities along the last axis, shifted by the max for stability."""
    z = np.asarray(logits)
    if z.shape[-1] == 0:
        raise ValueError("softmax over an empty vector")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(p: np.ndarray, label: int) -> float:
    """-ln p[label] with p floored at 1e-12."""
    p = np.asarray(p)
    if not (0 <= label < p.shape[-1]):
        raise ValueError(f"label {label} out of range for {p.shape[-1]} classes")
    return float(-np.log(max(float(p[label]), PROB_FLOOR)))


def cross_entropy_batch(p: np.ndarray, labels: np.ndarray) -> float:
    """Mean -ln p[i, labels[i]] over a batch."""
    picked = np.maximum(p[np.arange(p.shape[0]), labels], PROB_FLOOR)
    return float(np.mean(-np.log(picked)))


def softmax_xent_backward(p: np.ndarray, label: int) -> np.ndarray:
    """d(loss)/d(logits) for loss = cross_entropy(softmax(logits), label)."""
    g = p.copy()
    g[label] -= 1
    return g


def dropout(x: np.ndarray, rate: float = 0.5, train: bool = True,
            seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Inverted dropout. Train: zero each element with probability `rate` and
    scale survivors by 1/(1-rate); infer: identity. Returns (output, mask)
    where mask already carries the survivor scaling.

    The mask comes from a counter-based Philox stream keyed by `seed`, so a
    given (seed, shape) always yields the same mask.
    """
    if not (0.0 <= rate < 1.0):
        raise ValueError("dropout rate must be in [0, 1)")
    if not train or rate == 0.0:
        return x, np.ones_like(x)
    rng = np.random.Generator(np.random.Philox(key=seed))
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / (1.0 - rate)
    return x * mask, mask


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter tensor."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_param(cls, param: np.ndarray, lr: float = 1e-3) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), lr=lr)


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState):
    """One Adam update with bias correction; mutates param and state in place.

        m <- b1*m + (1-b1)*g        v <- b2*v + (1-b2)*g^2
        p <- p - lr * m_hat / (sqrt(v_hat) + eps)
    """
    if param.shape != grad.shape:
        raise ValueError(f"param shape {param.shape} != grad shape {grad.shape}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * np.square(grad)
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    param -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype)
    return param, state
