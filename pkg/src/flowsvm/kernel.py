"""Gaussian RBF kernel, Gram matrices and a row cache for the SMO solver."""
from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

DEFAULT_FULL_GRAM_CAP = 8192
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class KernelParams:
    gamma: float

    def __post_init__(self):
        if not (isinstance(self.gamma, (int, float)) and math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")


def rbf(params: KernelParams, x, y) -> float:
    """exp(-gamma * ||x - y||^2) for two vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("rbf inputs must be finite")
    d = x - y
    return math.exp(-params.gamma * float(np.sum(d * d)))


def sq_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances via explicit differences.

    Avoids the ``|a|^2 + |b|^2 - 2ab`` expansion, which loses precision for
    nearby points and can go slightly negative.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    out = np.empty((a.shape[0], b.shape[0]))
    step = max(1, _CHUNK_ELEMENTS // max(1, b.shape[0] * a.shape[1]))
    for start in range(0, a.shape[0], step):
        diff = a[start:start + step, None, :] - b[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[start:start + step])
    return out


def cross_kernel(params: KernelParams, a, b) -> np.ndarray:
    """Kernel values between every row of ``a`` and every row of ``b``."""
    return np.exp(-params.gamma * sq_distances(a, b))


def gram(params: KernelParams, features) -> np.ndarray:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    k = cross_kernel(params, x, x)
    # exact symmetry and unit diagonal regardless of summation order
    k = np.triu(k) + np.triu(k, 1).T
    np.fill_diagonal(k, 1.0)
    return k


class KernelRows:
    """Row access to the Gram matrix of ``features``.

    Below ``cap`` rows the full matrix is materialized; above it rows are
    computed on demand and kept in an LRU cache of ``cache_rows`` entries.
    """

    def __init__(self, params: KernelParams, features, cap: int = DEFAULT_FULL_GRAM_CAP,
                 cache_rows: int = 2048):
        self.params = params
        self.x = np.asarray(features, dtype=float)
        self.n = len(self.x)
        self.full = gram(params, self.x) if self.n <= cap else None
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._cache_rows = cache_rows
        self._lock = threading.Lock()

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        with self._lock:
            r = self._cache.get(i)
            if r is not None:
                self._cache.move_to_end(i)
                return r
        r = cross_kernel(self.params, self.x[i:i + 1], self.x)[0]
        r[i] = 1.0
        r.setflags(write=False)
        with self._lock:
            self._cache[i] = r
            if len(self._cache) > self._cache_rows:
                self._cache.popitem(last=False)
        return r

    def diag(self) -> np.ndarray:
        return np.ones(self.n)
