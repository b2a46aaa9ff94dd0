"""Generalization-bound calculators with every intermediate exposed.

Log bases follow the printed formulas: ``log2`` inside covering numbers and
their closed-form descendants, natural log everywhere else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .classes import ClassSpec, Family


class DomainError(ValueError):
    """Inputs outside the region where a printed formula is defined."""


@dataclass(frozen=True)
class BoundInputs:
    n: int
    delta: float
    G: float = 2.0
    H: float = 2.0
    B: float = 1.0
    G_cw: float = 2.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if min(self.G, self.H, self.B, self.G_cw) < 0:
            raise ValueError("G, H, B, G_cw must be >= 0")


@dataclass(frozen=True)
class BoundReport:
    """``value`` is the fsum of ``terms``; ``intermediates`` are not additive."""

    value: float
    terms: dict
    formula_id: str
    intermediates: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, terms: dict, formula_id: str, intermediates=None, notes=None) -> "BoundReport":
        return cls(math.fsum(terms.values()), dict(terms), formula_id, dict(intermediates or {}), dict(notes or {}))

    def reconstruct(self) -> float:
        return math.fsum(self.terms.values())

    def to_dict(self) -> dict:
        return {
            "formula_id": self.formula_id,
            "value": self.value,
            "terms": dict(self.terms),
            "intermediates": dict(self.intermediates),
            "notes": dict(self.notes),
        }


def _positive_eps(eps):
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0):
        raise ValueError("eps must be > 0")
    return eps


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def covering_lipschitz(spec: ClassSpec, eps, n: int, G: float):
    """log2 of the sup-metric covering number of the loss class at scale eps."""
    eps = _positive_eps(eps)
    W, R, m, d = spec.W, spec.R, spec.m, spec.d
    if spec.family is Family.L2:
        return _out(np.ceil(G * G * W * W * R * R / eps**2) * math.log2(2 * m * n + 1))
    count = np.ceil(288 * G * G * W * W * R * R * (2 + math.log(d)) / eps**2)
    return _out(count * np.log2(2 * np.ceil(8 * G * W * R / eps) * m * n + 1))


def covering_smooth(spec: ClassSpec, eps, n: int, H: float, r: float):
    """log2 covering number, RMS metric, of the sub-level set {L_hat <= r} of F2."""
    eps = _positive_eps(eps)
    if r < 0:
        raise ValueError("r must be >= 0")
    W, R, m = spec.W, spec.R, spec.m
    return _out(np.ceil(12 * H * W * W * R * R * r / eps**2) * math.log2(2 * m * n + 1))


def _dudley_on_grid(cov: np.ndarray, eps: np.ndarray, n: int) -> tuple:
    f = np.sqrt(np.maximum(cov, 0.0) / n)
    seg = 0.5 * (f[1:] + f[:-1]) * np.diff(eps)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    objective = 4 * eps + 10 * tail
    k = int(np.argmin(objective))
    return float(objective[k]), float(eps[k])


def _evaluate_covering(covering, eps):
    try:
        out = np.asarray(covering(eps), dtype=float)
        if out.shape == eps.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([covering(float(e)) for e in eps])


def dudley_bound_detail(covering: Callable, B: float, n: int, upper: Optional[float] = None,
                        rel_tol: float = 1e-4, alpha_floor: float = 1e-12) -> tuple:
    """(bound, minimising alpha) for inf_a 4a + 10 int_a^upper sqrt(covering(e)/n) de.

    The integral is accumulated from ``upper`` downward on a log grid, so every
    grid point is a candidate alpha; the grid doubles until the minimum moves
    by less than ``rel_tol`` relative.
    """
    upper = B if upper is None else upper
    if not 0 < upper <= B or n < 1:
        raise ValueError("need 0 < upper <= B and n >= 1")
    points = 256
    eps = np.geomspace(upper * alpha_floor, upper, points)
    prev = _dudley_on_grid(_evaluate_covering(covering, eps), eps, n)
    while True:
        points *= 2
        eps = np.geomspace(upper * alpha_floor, upper, points)
        cur = _dudley_on_grid(_evaluate_covering(covering, eps), eps, n)
        if abs(cur[0] - prev[0]) <= rel_tol * max(abs(cur[0]), 1e-300) or points >= 2**20:
            return cur
        prev = cur


def dudley_bound(covering: Callable, B: float, n: int, upper: Optional[float] = None) -> float:
    return dudley_bound_detail(covering, B, n, upper)[0]


def _positive_log(arg: float, what: str) -> float:
    if not arg > 0 or not math.isfinite(arg):
        raise DomainError(f"{what}: log argument {arg!r} is not a positive finite number")
    return math.log(arg)


def rademacher_closed_form(spec: ClassSpec, inputs: BoundInputs) -> float:
    """Closed-form empirical Rademacher bound for F2 or F1 (Dudley with alpha chosen)."""
    G, B, n = inputs.G, inputs.B, inputs.n
    W, R, m, d = spec.W, spec.R, spec.m, spec.d
    if G <= 0:
        raise DomainError("G must be > 0: the log argument diverges")
    if W * R == 0:
        return 0.0
    scale = G * W * R
    if spec.family is Family.L2:
        l2 = math.log2(3 * m * n)
        root = math.sqrt(l2 / n)
        arg = 6 * B * math.sqrt(n) / (5 * scale * math.sqrt(l2))
        log_factor = _positive_log(arg, "F2 Rademacher bound")
        if log_factor <= 0:
            raise DomainError(f"F2 Rademacher bound: log factor {log_factor} <= 0")
        return 10 * scale * root * log_factor
    lnd = math.log(d)
    inner = 24 * m * n * scale
    l2 = math.log2(inner) if inner > 0 else -1.0
    if lnd <= 0 or l2 <= 0:
        raise DomainError("F1 Rademacher bound needs d >= 2 and 24 m n G W R > 1")
    root = math.sqrt(lnd * l2)
    arg = (B + inner) / (40 * math.sqrt(2) * scale * root)
    log_factor = _positive_log(arg, "F1 Rademacher bound")
    return 120 * math.sqrt(2) * scale * root / math.sqrt(n) * log_factor**2


@dataclass(frozen=True)
class SmoothIntermediates:
    C: float
    r0: float
    r_star: float
    D0: float
    log_factor: float
    B: float

    def psi(self, r: float) -> float:
        return local_rademacher_psi(r, self, self.B)

    def to_dict(self) -> dict:
        return {"C": self.C, "r0": self.r0, "r_star": self.r_star, "D0": self.D0,
                "log_factor": self.log_factor, "B": self.B,
                "psi": "psi(r) = 4 sqrt(r) C ln(3 sqrt(B) / C)"}


def smooth_intermediates(spec: ClassSpec, inputs: BoundInputs) -> SmoothIntermediates:
    """C, r0, r*, D0 for the smooth-loss bound over F2.

    C  = 5 sqrt(3) W R sqrt(H log2(3mn) / n)
    r0 = B (ln(1/delta) + ln ln n) / n
    r* = (4 C ln(3 sqrt(B) / C))^2
    D0 = 45 r* + 20 r0
    """
    if spec.family is not Family.L2:
        raise DomainError("the smooth-loss bound is stated for F2 only")
    n, B, H = inputs.n, inputs.B, inputs.H
    if n < 3:
        raise DomainError("need n >= 3 so that ln ln n > 0")
    C = 5 * math.sqrt(3) * spec.W * spec.R * math.sqrt(H * math.log2(3 * spec.m * n) / n)
    r0 = B * (math.log(1 / inputs.delta) + math.log(math.log(n))) / n
    if C == 0:
        log_factor, r_star = 0.0, 0.0
    else:
        log_factor = _positive_log(3 * math.sqrt(B) / C, "local Rademacher bound")
        if log_factor <= 0:
            raise DomainError(f"ln(3 sqrt(B)/C) = {log_factor} <= 0; psi would be negative")
        r_star = (4 * C * log_factor) ** 2
    return SmoothIntermediates(C, r0, r_star, 45 * r_star + 20 * r0, log_factor, B)


def local_rademacher_psi(r: float, inter: SmoothIntermediates, B: Optional[float] = None) -> float:
    if r < 0:
        raise ValueError("r must be >= 0")
    if B is None or B == inter.B:
        log_factor = inter.log_factor
    else:
        log_factor = math.log(3 * math.sqrt(B) / inter.C)
    return 4 * math.sqrt(r) * inter.C * log_factor


def lipschitz_generalization_bound(L_hat: float, spec: ClassSpec, inputs: BoundInputs) -> BoundReport:
    """L_hat + 2 Rad + 3 B sqrt(ln(2/delta) / 2n), uniformly over the class."""
    if L_hat < 0:
        raise ValueError("L_hat must be >= 0")
    rad = rademacher_closed_form(spec, inputs)
    conf = 3 * inputs.B * math.sqrt(math.log(2 / inputs.delta) / (2 * inputs.n))
    return BoundReport.from_terms(
        {"empirical_risk": L_hat, "complexity": 2 * rad, "confidence": conf},
        f"lipschitz_uniform_{spec.family.value}",
        {"rademacher": rad, "B": inputs.B, "G": inputs.G},
        {"constants": "complexity factor 2, confidence 3B sqrt(ln(2/delta)/(2n))",
         "log_base": "log2 inside the Rademacher term, natural log elsewhere"},
    )


def smooth_uniform_bound_solve(L_hat: float, inter: SmoothIntermediates) -> BoundReport:
    """Largest L with L = L_hat + 45 r* + sqrt(8 r* L) + sqrt(4 r0 L) + 20 r0.

    With a = sqrt(8 r*) + sqrt(4 r0) and c = L_hat + 45 r* + 20 r0 this is a
    quadratic in sqrt(L), whose larger root is (a + sqrt(a^2 + 4c)) / 2.
    """
    if L_hat < 0:
        raise ValueError("L_hat must be >= 0")
    a = math.sqrt(8 * inter.r_star) + math.sqrt(4 * inter.r0)
    c = L_hat + 45 * inter.r_star + 20 * inter.r0
    root = (a + math.sqrt(a * a + 4 * c)) / 2
    L = root * root
    terms = {
        "empirical_risk": L_hat,
        "fixed_point": 45 * inter.r_star,
        "fixed_point_cross": math.sqrt(8 * inter.r_star * L),
        "confidence_cross": math.sqrt(4 * inter.r0 * L),
        "confidence": 20 * inter.r0,
    }
    return BoundReport(L, terms, "smooth_uniform_fixed_point", {"a": a, "c": c, **inter.to_dict()},
                       {"resolution": "exact largest root of the implicit inequality"})


def smooth_excess_risk_chain(L_star: float, inter: SmoothIntermediates) -> BoundReport:
    """L_hat(w*) <= L* + sqrt(4 r0 L*) + 4 r0, then L(w_hat) <= L_hat* + sqrt(D0 L_hat*) + D0."""
    if L_star < 0:
        raise ValueError("L_star must be >= 0")
    emp = L_star + math.sqrt(4 * inter.r0 * L_star) + 4 * inter.r0
    terms = {"empirical_risk_at_optimum": emp, "cross": math.sqrt(inter.D0 * emp), "D0": inter.D0}
    return BoundReport.from_terms(
        terms, "smooth_excess_risk_chain",
        {"L_star": L_star, "bernstein_excess": emp - L_star, **inter.to_dict()},
        {"D0": "45 r* + 20 r0 from the explicit chain; the order-of-magnitude form "
               "B ln(1/delta) + W^2 R^2 H is not used",
         "additive_term": "L_hat(w*) kept as an additive term (conservative)"},
    )


def online_excess_risk(L_star: float, W2: float, H: float, n: int) -> BoundReport:
    """L* + sqrt(2 x L*) + 8x with x = H W2^2 / n, plus the exact plugged-in value.

    ``intermediates['exact']`` is L*/(1 - 4 eta H) + W2^2 / (2 eta (1 - 4 eta H) n)
    at the smooth-optimal eta; ``intermediates['exact_simplified']`` is the same
    quantity written as L* + 2 sqrt(4x^2 + 2xL*) + 4x.
    """
    if min(L_star, W2, H) < 0 or n < 1:
        raise ValueError("need L_star, W2, H >= 0 and n >= 1")
    x = H * W2 * W2 / n
    terms = {"L_star": L_star, "root": math.sqrt(2 * x * L_star), "linear": 8 * x}
    inter = {"x": x}
    if W2 > 0 and H > 0:
        S = math.sqrt(4 * H * H * W2 * W2 + 2 * H * L_star * n)
        eta = W2 / (4 * H * W2 + 2 * S)
        shrink = 1 - 4 * eta * H
        inter.update(
            eta=eta,
            exact=L_star / shrink + W2 * W2 / (2 * eta * shrink * n),
            exact_expanded=L_star + 2 * H * W2 * L_star / S + W2 / n * (4 * H * H * W2 * W2 / S + S + 4 * H * W2),
            exact_simplified=L_star + 2 * math.sqrt(4 * x * x + 2 * x * L_star) + 4 * x,
        )
    return BoundReport.from_terms(terms, "online_smooth_rate", inter)


def chapelle_wu_bound(L_hat: float, inputs: BoundInputs, spec: ClassSpec) -> BoundReport:
    """Baseline: L_hat + 3 G_cw W R sqrt(m/n) + sqrt(8 ln(1/delta) / n)."""
    n = inputs.n
    complexity = 3 * inputs.G_cw * spec.W * spec.R * math.sqrt(spec.m / n)
    conf = math.sqrt(8 * math.log(1 / inputs.delta) / n)
    return BoundReport.from_terms(
        {"empirical_risk": L_hat, "complexity": complexity, "confidence": conf},
        "chapelle_wu_l2_lipschitz", {"G_cw": inputs.G_cw, "m": spec.m},
    )
