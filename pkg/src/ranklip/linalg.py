"""Stable vector primitives and the row-norm / operator-norm identity.

Everything here works on plain numpy arrays.  Functions that reduce over a
score vector accept batches shaped ``(..., m)`` and reduce over the last axis.
"""
from __future__ import annotations

import enum

import numpy as np


class Norm(enum.Enum):
    """The three norm exponents the toolkit needs; infinity is its own case."""

    L1 = "1"
    L2 = "2"
    LINF = "inf"

    @property
    def dual(self) -> "Norm":
        return _DUAL[self]

    @classmethod
    def parse(cls, p) -> "Norm":
        if isinstance(p, Norm):
            return p
        if isinstance(p, str):
            key = p.strip().lower().lstrip("l")
            if key in ("inf", "infinity", "∞"):
                return cls.LINF
            try:
                p = float(key)
            except ValueError:
                raise ValueError(f"unrecognised norm exponent {p!r}") from None
        if p < 1:
            raise ValueError(f"norm exponent must be >= 1, got {p}")
        if np.isinf(p):
            return cls.LINF
        if p == 1:
            return cls.L1
        if p == 2:
            return cls.L2
        raise ValueError(f"only p in {{1, 2, inf}} is supported, got {p}")

    def of(self, v: np.ndarray, axis: int = -1) -> np.ndarray:
        a = np.abs(v)
        if self is Norm.L1:
            return np.sum(a, axis=axis)
        if self is Norm.L2:
            return np.sqrt(np.sum(a * a, axis=axis))
        return np.max(a, axis=axis)


_DUAL = {Norm.L1: Norm.LINF, Norm.L2: Norm.L2, Norm.LINF: Norm.L1}


def as_vector(v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise ValueError(f"{name} must be a nonempty vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_matrix(X, name: str = "X") -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def stable_logsumexp(v) -> np.ndarray | float:
    """log(sum(exp(v))) over the last axis, shifted by the max so it never overflows."""
    v = as_vector(v)
    top = np.max(v, axis=-1, keepdims=True)
    out = top[..., 0] + np.log(np.sum(np.exp(v - top), axis=-1))
    return float(out) if out.ndim == 0 else out


def softmax(v) -> np.ndarray:
    v = as_vector(v)
    lse = np.asarray(stable_logsumexp(v))
    return np.exp(v - lse[..., None])


def max_row_norm(X, p) -> float:
    """max_j ||X_j||_p, which equals ||X^T||_{1->p} = ||X||_{q->inf} for q dual to p."""
    X = as_matrix(X)
    try:
        norm = Norm.parse(p)
    except ValueError:
        if isinstance(p, str) or not p >= 1:
            raise
        # finite p outside {1, 2}: plain power sum
        return float(np.max(np.sum(np.abs(X) ** p, axis=1) ** (1.0 / p)))
    return float(np.max(norm.of(X, axis=1)))


def _unit_vectors(q: Norm, count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    if q is Norm.L2:
        U = rng.standard_normal((count, d))
    elif q is Norm.L1:
        U = rng.standard_exponential((count, d)) * rng.choice([-1.0, 1.0], size=(count, d))
    else:
        U = rng.uniform(-1.0, 1.0, size=(count, d))
    scale = q.of(U, axis=1)
    scale[scale == 0] = 1.0
    return U / scale[:, None]


def directed_witness(X, q) -> np.ndarray:
    """Unit-q vector attaining ||X||_{q->inf}, built from the largest dual-norm row."""
    X = as_matrix(X)
    q = Norm.parse(q)
    p = q.dual
    j = int(np.argmax(p.of(X, axis=1)))
    row = X[j]
    d = X.shape[1]
    if q is Norm.L2:
        nrm = np.sqrt(np.sum(row * row))
        if nrm == 0:
            u = np.zeros(d)
            u[0] = 1.0
            return u
        return row / nrm
    if q is Norm.L1:
        u = np.zeros(d)
        u[int(np.argmax(np.abs(row)))] = 1.0
        return u
    return np.where(row < 0, -1.0, 1.0)


def random_probe_operator_norm(X, q, budget: int, seed=None) -> float:
    """Largest ||Xu||_inf over ``budget`` random unit-q vectors (no witness)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    X = as_matrix(X)
    q = Norm.parse(q)
    rng = np.random.default_rng(seed)
    U = _unit_vectors(q, budget, X.shape[1], rng)
    return float(np.max(np.abs(U @ X.T)))


def operator_norm_search(X, q, budget: int, seed=None) -> float:
    X = as_matrix(X)
    probe = random_probe_operator_norm(X, q, budget, seed)
    u = directed_witness(X, q)
    return max(probe, float(np.max(np.abs(X @ u))))
