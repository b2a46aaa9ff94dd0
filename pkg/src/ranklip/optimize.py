"""Norm-ball projections, projected OGD with iterate averaging, and batch ERM."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .classes import BallConstraint, Family
from .loss import LISTNET


def project_l2(w, W2: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if W2 < 0:
        raise ValueError("W2 must be >= 0")
    nrm = math.sqrt(float(np.dot(w, w)))
    if nrm <= W2:
        return w.copy()
    return w * (W2 / nrm)


def project_l1(w, W1: float) -> np.ndarray:
    """Euclidean projection onto {||x||_1 <= W1} by sorting |w| and soft-thresholding."""
    w = np.asarray(w, dtype=float)
    if W1 < 0:
        raise ValueError("W1 must be >= 0")
    a = np.abs(w)
    if a.sum() <= W1:
        return w.copy()
    if W1 == 0:
        return np.zeros_like(w)
    u = np.sort(a)[::-1]
    excess = np.cumsum(u) - W1
    ks = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - excess / ks > 0)[0][-1]
    theta = excess[rho] / (rho + 1)
    return np.sign(w) * np.maximum(a - theta, 0.0)


def smooth_eta(W2: float, H: float, L_star: float, n: int) -> float:
    """Learning rate W2 / (4 H W2 + 2 sqrt(4 H^2 W2^2 + 2 H L* n)).

    ``H`` is smoothness in w, i.e. R_X^2 times the loss's l-inf smoothness.
    """
    if W2 <= 0 or H <= 0:
        raise ValueError("W2 and H must be positive")
    if L_star < 0 or n < 1:
        raise ValueError("need L_star >= 0 and n >= 1")
    return W2 / (4 * H * W2 + 2 * math.sqrt(4 * H * H * W2 * W2 + 2 * H * L_star * n))


def online_to_batch_average(trajectory: Sequence) -> np.ndarray:
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    return np.mean(np.asarray(trajectory, dtype=float), axis=0)


def _objective(data, loss):
    X, Y = data.X, data.Y
    n = X.shape[0]

    def fun(w):
        S = X @ w
        value = math.fsum(np.atleast_1d(loss.value(S, Y))) / n
        G = loss.gradient(S, Y)
        grad = np.einsum("nmd,nm->d", X, G) / n
        return value, grad

    return fun


@dataclass(frozen=True)
class OgdConfig:
    """``schedule`` is 'fixed' (use ``eta``) or 'smooth-optimal' (derive eta from L_star)."""

    eta: float = 0.1
    schedule: str = "fixed"
    passes: int = 1
    seed: int = 0
    L_star: float = 0.0

    def __post_init__(self):
        if self.schedule not in ("fixed", "smooth-optimal"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.schedule == "fixed" and self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")


@dataclass(frozen=True)
class TrainResult:
    w_average: np.ndarray
    w_final: np.ndarray
    per_step_losses: np.ndarray
    cumulative_regret_proxy: float
    eta: float
    max_iterate_norm: float


def ogd_train(data, ball: BallConstraint, config: OgdConfig = OgdConfig(), loss=LISTNET) -> TrainResult:
    """Projected OGD from w = 0, one step per instance per pass.

    The first pass visits instances in dataset order; later passes use a
    seeded permutation.  ``w_average`` is the mean of the iterates at which
    each loss was evaluated.
    """
    X, Y = data.X, data.Y
    n, _, d = X.shape
    if config.schedule == "smooth-optimal":
        if ball.family is not Family.L2:
            raise ValueError("smooth-optimal eta is defined for the l2 ball only")
        R = float(np.max(np.linalg.norm(X, axis=2)))
        eta = smooth_eta(ball.radius, R * R * loss.H, config.L_star, n * config.passes)
    else:
        eta = config.eta

    rng = np.random.default_rng(config.seed)
    order = [np.arange(n)] + [rng.permutation(n) for _ in range(config.passes - 1)]
    order = np.concatenate(order)

    w = np.zeros(d)
    total = np.zeros(d)
    losses = np.empty(len(order))
    max_norm = 0.0
    for t, i in enumerate(order):
        s = X[i] @ w
        losses[t] = loss.value(s, Y[i])
        total += w
        g = X[i].T @ loss.gradient(s, Y[i])
        w = ball.project(w - eta * g)
        max_norm = max(max_norm, ball.norm(w))

    w_avg = total / len(order)
    avg_losses = np.atleast_1d(loss.value(X[order] @ w_avg, Y[order]))
    regret = math.fsum(losses) - math.fsum(avg_losses)
    return TrainResult(w_avg, w, losses, regret, eta, max_norm)


@dataclass(frozen=True)
class DescentResult:
    w: np.ndarray
    value: float
    iterations: int
    converged: bool
    projected_gradient_norm: float
    values: list = field(default_factory=list)


def projected_descent(
    fun: Callable[[np.ndarray], tuple],
    w0,
    project: Callable[[np.ndarray], np.ndarray],
    tolerance: float = 1e-8,
    max_iters: int = 1000,
    step0: float = 1.0,
    c: float = 1e-4,
) -> DescentResult:
    """Projected gradient descent with Armijo backtracking along the projection arc.

    Each iteration starts at ``step0`` and halves until
    f(w+) <= f(w) + c <g, w+ - w>.  Stops when ||w - P(w - g)|| <= tolerance.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    w = project(np.asarray(w0, dtype=float))
    f, g = fun(w)
    values = [f]
    pg = float(np.linalg.norm(w - project(w - g)))
    it = 0
    while pg > tolerance and it < max_iters:
        t = step0
        while True:
            w_new = project(w - t * g)
            f_new, g_new = fun(w_new)
            if f_new <= f + c * float(g @ (w_new - w)):
                break
            t *= 0.5
            if t < 1e-20:
                return DescentResult(w, f, it, False, pg, values)
        w, f, g = w_new, f_new, g_new
        values.append(f)
        pg = float(np.linalg.norm(w - project(w - g)))
        it += 1
    return DescentResult(w, f, it, pg <= tolerance, pg, values)


def erm_train(data, ball: BallConstraint, tolerance: float = 1e-8, max_iters: int = 1000,
              loss=LISTNET, w0: Optional[np.ndarray] = None) -> DescentResult:
    """Minimise the empirical risk over the ball; starts at w = 0 unless ``w0`` is given."""
    start = np.zeros(data.X.shape[2]) if w0 is None else w0
    return projected_descent(_objective(data, loss), start, ball.project, tolerance, max_iters)
