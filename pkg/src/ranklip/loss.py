"""Top-1 ListNet loss with exact derivatives.

    phi(s, y) = -sum_j softmax(y)_j * log softmax(s)_j
              = <softmax(y), logsumexp(s) - s>

The second form is what gets evaluated, so scores of order +-700 are fine.
All functions except the Hessian broadcast over leading batch axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classes import ClassSpec
from .linalg import as_vector, softmax, stable_logsumexp

# Lipschitz and smoothness constants w.r.t. the l-inf norm on scores
LISTNET_G = 2.0
LISTNET_H = 2.0


def _pair(s, y):
    s = as_vector(s, "s")
    y = as_vector(y, "y")
    if s.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: s has {s.shape[-1]} entries, y has {y.shape[-1]}")
    return s, y


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def listnet_loss(s, y):
    s, y = _pair(s, y)
    lse = np.asarray(stable_logsumexp(s))
    return _scalar(np.sum(softmax(y) * (lse[..., None] - s), axis=-1))


def listnet_gradient(s, y) -> np.ndarray:
    s, y = _pair(s, y)
    return softmax(s) - softmax(y)


def listnet_hessian(s, y=None) -> np.ndarray:
    """diag(p) - p p^T with p = softmax(s); ``y`` only participates in validation."""
    s = as_vector(s, "s")
    if y is not None:
        s, _ = _pair(s, y)
    if s.ndim != 1:
        raise ValueError("listnet_hessian takes a single score vector")
    p = softmax(s)
    return np.diag(p) - np.outer(p, p)


def gradient_dual_norm(s, y):
    """||grad_s phi||_1, the l-inf Lipschitz witness."""
    return _scalar(np.sum(np.abs(listnet_gradient(s, y)), axis=-1))


def hessian_abs_sum(s, y=None):
    """Entrywise sum_{j,k} |H_jk|, an upper bound on ||H||_{inf->1}.

    Diagonal entries contribute |p_j - p_j^2|; off-diagonal entries are all
    -p_j p_k, contributing (sum p)^2 - sum p^2 in total.
    """
    s = as_vector(s, "s")
    if y is not None:
        s, _ = _pair(s, y)
    p = softmax(s)
    diag = np.sum(np.abs(p - p * p), axis=-1)
    off = np.sum(p, axis=-1) ** 2 - np.sum(p * p, axis=-1)
    return _scalar(diag + off)


def self_bounding_gap(s1, s2, y, H: float):
    """6H(phi1 + phi2)||s1 - s2||_inf^2 - (phi1 - phi2)^2; nonnegative for H-smooth phi >= 0."""
    if H < 0:
        raise ValueError("H must be >= 0")
    s1, y = _pair(s1, y)
    s2, _ = _pair(s2, y)
    if s1.shape[-1] != s2.shape[-1]:
        raise ValueError("s1 and s2 differ in length")
    f1 = np.asarray(listnet_loss(s1, y))
    f2 = np.asarray(listnet_loss(s2, y))
    dist = np.max(np.abs(s1 - s2), axis=-1)
    return _scalar(6.0 * H * (f1 + f2) * dist**2 - (f1 - f2) ** 2)


def uniform_loss_bound(spec: ClassSpec, m: Optional[int] = None) -> float:
    """B = 2 W R + ln m.

    -log softmax(s)_j = logsumexp(s) - s_j <= 2 ||s||_inf + ln m, and
    ||Xw||_inf <= W R on the class.
    """
    m = spec.m if m is None else m
    if m < 2:
        raise ValueError("uniform_loss_bound needs m >= 2")
    return 2.0 * spec.W * spec.R + math.log(m)


@dataclass(frozen=True)
class LossEvaluation:
    value: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray] = None


@dataclass(frozen=True)
class LossProfile:
    G: float
    H: float
    B: float


def evaluate(s, y, with_hessian: bool = False) -> LossEvaluation:
    s, y = _pair(s, y)
    if s.ndim != 1:
        raise ValueError("evaluate takes a single score vector")
    hess = listnet_hessian(s) if with_hessian else None
    return LossEvaluation(listnet_loss(s, y), listnet_gradient(s, y), hess)


def listnet_profile(spec: ClassSpec) -> LossProfile:
    return LossProfile(G=LISTNET_G, H=LISTNET_H, B=uniform_loss_bound(spec))


@dataclass(frozen=True)
class ListNet:
    """Loss object handed to the trainers; ``value``/``gradient`` are batched."""

    G: float = LISTNET_G
    H: float = LISTNET_H

    def value(self, s, y):
        return listnet_loss(s, y)

    def gradient(self, s, y):
        return listnet_gradient(s, y)


LISTNET = ListNet()
