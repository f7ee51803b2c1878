"""Vectorized exact and smoothed norms on flattened truncations.

Arrays have shape ``(n, S)``: one column per multistart candidate.  The
smoothed p-norm replaces ``|x_i|`` by ``sqrt(x_i^2 + (mu*scale)^2)``; the
sup norm is smoothed by a log-sum-exp with temperature ``mu*scale``, where
``scale`` is the column's largest magnitude.
"""

from __future__ import annotations

import math

import numpy as np

from . import spaces as sp
from .spaces import DirectSum, Space

_TINY = 1e-300


class DenseNorm:
    size: int

    @staticmethod
    def build(space: Space, layout) -> "DenseNorm":
        if isinstance(space, DirectSum):
            return SumNorm(space.outer, DenseNorm.build(space.left, layout[0]),
                           DenseNorm.build(space.right, layout[1]))
        return LeafNorm(sp.exponent(space), layout)

    def value(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def smooth(self, X: np.ndarray, mu: float) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def leaf_exponents(self) -> list[float]:
        raise NotImplementedError


def _combine(parts, r):
    if math.isinf(r):
        return np.max(parts, axis=0)
    if r == 1:
        return np.sum(parts, axis=0)
    if r == 2:
        return np.sqrt(np.einsum("ij,ij->j", parts, parts))
    scale = np.max(parts, axis=0)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sum((parts / safe) ** r, axis=0) ** (1.0 / r)


class LeafNorm(DenseNorm):
    def __init__(self, p: float, size: int):
        self.p = p
        self.size = size

    def leaf_exponents(self):
        return [self.p]

    def value(self, X):
        X = np.abs(np.asarray(X, dtype=float).reshape(self.size, -1))
        if X.shape[0] == 0:
            return np.zeros(X.shape[1])
        return _combine(X, self.p)

    def smooth(self, X, mu):
        X = np.asarray(X, dtype=float).reshape(self.size, -1)
        p = self.p
        scale = np.max(np.abs(X), axis=0, keepdims=True)
        eps = mu * np.maximum(scale, _TINY)
        if math.isinf(p):
            if mu == 0:
                k = np.argmax(np.abs(X), axis=0)
                cols = np.arange(X.shape[1])
                val = np.abs(X[k, cols])
                grad = np.zeros_like(X)
                grad[k, cols] = np.sign(X[k, cols])
                return val, grad
            # floor eps so an all-zero column keeps a finite softmax
            eps = np.maximum(eps, _TINY)
            s = np.hypot(X, eps)
            top = np.max(s, axis=0, keepdims=True)
            w = np.exp((s - top) / eps)
            z = np.sum(w, axis=0, keepdims=True)
            val = (top + eps * np.log(z))[0]
            grad = (w / z) * X / s
            return val, grad
        if p == 2 and mu == 0:
            val = np.sqrt(np.einsum("ij,ij->j", X, X))
            return val, X / np.where(val > 0, val, 1.0)
        s = np.sqrt(X * X + eps * eps) if mu > 0 else np.abs(X)
        val = _combine(s, p)
        safe_s = np.where(s > 0, s, 1.0)
        safe_v = np.where(val > 0, val, 1.0)
        grad = np.where(s > 0, (safe_s / safe_v) ** (p - 1) * X / safe_s, 0.0)
        return val, grad


class SumNorm(DenseNorm):
    def __init__(self, outer: float, left: DenseNorm, right: DenseNorm):
        self.outer = outer
        self.left = left
        self.right = right
        self.size = left.size + right.size

    def leaf_exponents(self):
        return self.left.leaf_exponents() + self.right.leaf_exponents()

    def value(self, X):
        X = np.asarray(X, dtype=float).reshape(self.size, -1)
        k = self.left.size
        parts = np.stack([self.left.value(X[:k]), self.right.value(X[k:])])
        return _combine(parts, self.outer)

    def smooth(self, X, mu):
        X = np.asarray(X, dtype=float).reshape(self.size, -1)
        k = self.left.size
        vl, gl = self.left.smooth(X[:k], mu)
        vr, gr = self.right.smooth(X[k:], mu)
        r = self.outer
        val = _combine(np.stack([vl, vr]), r)
        safe = np.where(val > 0, val, 1.0)
        if r == 1:
            wl = wr = np.ones_like(val)
        else:
            wl = (vl / safe) ** (r - 1)
            wr = (vr / safe) ** (r - 1)
        return val, np.vstack([gl * wl, gr * wr])
