"""Independent numerical checks of the loss constants and the norm identity."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import Norm, as_vector, directed_witness, max_row_norm, random_probe_operator_norm
from .loss import (
    LISTNET_G,
    LISTNET_H,
    gradient_dual_norm,
    hessian_abs_sum,
    listnet_gradient,
    listnet_loss,
    self_bounding_gap,
)

BOUND_TOL = 1e-9
IDENTITY_TOL = 1e-12
WITNESS_TOL = 1e-9


def finite_difference_gradient(s, y, h: float = 1e-5) -> np.ndarray:
    if h <= 0:
        raise ValueError("h must be > 0")
    s = as_vector(s, "s")
    out = np.empty_like(s)
    for j in range(s.size):
        e = np.zeros_like(s)
        e[j] = h
        out[j] = (listnet_loss(s + e, y) - listnet_loss(s - e, y)) / (2 * h)
    return out


def finite_difference_hessian(s, y, h: float = 1e-5) -> np.ndarray:
    """Central differences of the analytic gradient, column by column."""
    if h <= 0:
        raise ValueError("h must be > 0")
    s = as_vector(s, "s")
    m = s.size
    out = np.empty((m, m))
    for k in range(m):
        e = np.zeros_like(s)
        e[k] = h
        out[:, k] = (listnet_gradient(s + e, y) - listnet_gradient(s - e, y)) / (2 * h)
    return out


@dataclass(frozen=True)
class CertificationReport:
    quantity: str
    estimate: float
    bound: float
    witnesses: list
    samples: int
    tolerance: float = BOUND_TOL
    passed: bool = field(default=False)

    def merge(self, other: "CertificationReport") -> "CertificationReport":
        if other.quantity != self.quantity:
            raise ValueError("cannot merge reports for different quantities")
        best = self if self.estimate >= other.estimate else other
        return _finalise(replace(best, samples=self.samples + other.samples))

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "estimate": self.estimate,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "passed": self.passed,
            "witnesses": [{k: _jsonable(v) for k, v in w.items()} for w in self.witnesses],
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Norm):
        return v.value
    return v


def _reevaluate(quantity: str, w: dict) -> float:
    if quantity == "listnet_lipschitz_linf":
        return gradient_dual_norm(w["s"], w["y"])
    if quantity == "listnet_smoothness_linf":
        return hessian_abs_sum(w["s"])
    if quantity == "self_bounding_violation":
        return -self_bounding_gap(w["s1"], w["s2"], w["y"], w["H"])
    if quantity == "row_norm_identity":
        return max_row_norm(w["X"], w["p"])
    raise KeyError(quantity)


def witnesses_reproduce(report: CertificationReport, tol: float = WITNESS_TOL) -> bool:
    return all(abs(_reevaluate(report.quantity, w) - w["value"]) <= tol for w in report.witnesses)


def _finalise(report: CertificationReport) -> CertificationReport:
    ok = report.estimate <= report.bound + report.tolerance and witnesses_reproduce(report)
    return replace(report, passed=bool(ok))


def estimate_lipschitz_constant(m: int, budget: int, seed=None, box: float = 30.0,
                                ascent_steps: int = 14) -> CertificationReport:
    """Largest ||grad_s phi||_1 found by random search in [-box, box]^m plus directed ascent.

    The ascent raises s at the coordinate where softmax(s) most exceeds
    softmax(y) and raises y where softmax(y) most exceeds softmax(s), with
    doubling steps, keeping a move only if the l1 norm does not drop.
    """
    if m < 2 or budget < 1:
        raise ValueError("need m >= 2 and budget >= 1")
    rng = np.random.default_rng(seed)
    Z = rng.uniform(-box, box, size=(budget, 2, m))
    vals = gradient_dual_norm(Z[:, 0], Z[:, 1])
    i = int(np.argmax(vals))
    s, y = Z[i, 0].copy(), Z[i, 1].copy()
    best = float(vals[i])
    witnesses = [{"s": s.copy(), "y": y.copy(), "value": best, "kind": "sample"}]

    g = listnet_gradient(s, y)
    j, k = int(np.argmax(g)), int(np.argmin(g))
    if j == k:
        k = (j + 1) % m
    step = 1.0
    for _ in range(ascent_steps):
        s2, y2 = s.copy(), y.copy()
        s2[j] += step
        y2[k] += step
        v = gradient_dual_norm(s2, y2)
        if v >= best:
            s, y, best = s2, y2, v
        step *= 2
    witnesses.append({"s": s, "y": y, "value": best, "kind": "ascent"})
    return _finalise(CertificationReport("listnet_lipschitz_linf", max(best, float(vals[i])), LISTNET_G,
                                         witnesses, budget))


def estimate_smoothness_constant(m: int, budget: int, seed=None) -> CertificationReport:
    """Largest Hessian abs-sum over random scores at log-uniform scales, plus the constant vector."""
    if m < 2 or budget < 1:
        raise ValueError("need m >= 2 and budget >= 1")
    rng = np.random.default_rng(seed)
    Z = rng.uniform(-1.0, 1.0, size=(budget, m + 1))
    S = Z[:, 1:] * 10.0 ** (2.25 * Z[:, :1] - 0.75)
    vals = hessian_abs_sum(S)
    i = int(np.argmax(vals))
    uniform = np.zeros(m)
    u_val = hessian_abs_sum(uniform)
    witnesses = [{"s": S[i].copy(), "value": float(vals[i]), "kind": "sample"},
                 {"s": uniform, "value": u_val, "kind": "uniform"}]
    estimate = max(float(vals[i]), u_val)
    return _finalise(CertificationReport("listnet_smoothness_linf", estimate, LISTNET_H, witnesses,
                                         budget + 1, IDENTITY_TOL))


def self_bounding_triples(m: int, count: int, rng: np.random.Generator, box: float = 5.0):
    """Random, identical, and gradient-directed (s1, s2, y) triples, about a third each."""
    s1 = rng.uniform(-box, box, size=(count, m))
    y = rng.uniform(-box, box, size=(count, m))
    s2 = rng.uniform(-box, box, size=(count, m))
    kind = np.arange(count) % 3
    same = kind == 1
    s2[same] = s1[same]
    directed = kind == 2
    g = listnet_gradient(s1[directed], y[directed])
    scale = np.max(np.abs(g), axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    t = 10.0 ** rng.uniform(-4, 1, size=(int(directed.sum()), 1))
    s2[directed] = s1[directed] - t * np.sign(rng.uniform(-1, 1, size=t.shape)) * g / scale
    return s1, s2, y


def self_bounding_sweep(m: int, count: int, seed=None, H: float = LISTNET_H) -> CertificationReport:
    """Worst violation of the self-bounding inequality; passes iff the min gap >= -1e-12."""
    if m < 1 or count < 1:
        raise ValueError("need m >= 1 and count >= 1")
    rng = np.random.default_rng(seed)
    s1, s2, y = self_bounding_triples(m, count, rng)
    gaps = np.atleast_1d(self_bounding_gap(s1, s2, y, H))
    i = int(np.argmin(gaps))
    witness = {"s1": s1[i], "s2": s2[i], "y": y[i], "H": H, "value": float(-gaps[i])}
    return _finalise(CertificationReport("self_bounding_violation", float(-gaps[i]), 0.0, [witness],
                                         count, IDENTITY_TOL))


def norm_identity_check(trials: int, seed=None, probes: int = 1000, max_dim: int = 8,
                        entry_range: float = 5.0) -> CertificationReport:
    """Random probes never beat max_j ||X_j||_p and the directed witness attains it.

    ``estimate`` is the worst of (probe - closed form) and (closed form - witness)
    across all matrices and p in {1, 2, inf}.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witness = None
    for _ in range(trials):
        m, d = rng.integers(1, max_dim + 1, size=2)
        X = rng.uniform(-entry_range, entry_range, size=(m, d))
        for p in Norm:
            q = p.dual
            closed = max_row_norm(X, p)
            probe = random_probe_operator_norm(X, q, probes, rng)
            attained = float(np.max(np.abs(X @ directed_witness(X, q))))
            violation = max(probe - closed, closed - attained)
            if violation > worst:
                worst = violation
                witness = {"X": X, "p": p, "value": closed, "probe": probe, "witness_value": attained}
    return _finalise(CertificationReport("row_norm_identity", float(worst), 0.0, [witness],
                                         trials * 3, WITNESS_TOL))
