"""Norm-ball constraints and the paired (weights, inputs) class descriptions."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import Norm


class Family(enum.Enum):
    """Which linear class: l2-bounded weights with l2-bounded rows, or l1 with l-inf rows."""

    L2 = "l2"
    L1 = "l1"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower()
        aliases = {"l2": cls.L2, "f2": cls.L2, "2": cls.L2, "l1": cls.L1, "f1": cls.L1, "1": cls.L1}
        if key not in aliases:
            raise ValueError(f"unknown class family {value!r}; expected l1 or l2")
        return aliases[key]

    @property
    def weight_norm(self) -> Norm:
        return Norm.L2 if self is Family.L2 else Norm.L1

    @property
    def row_norm(self) -> Norm:
        return self.weight_norm.dual


@dataclass(frozen=True)
class BallConstraint:
    family: Family
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")

    def norm(self, w) -> float:
        return float(self.family.weight_norm.of(np.asarray(w, dtype=float)))

    def contains(self, w, tol: float = 1e-9) -> bool:
        return self.norm(w) <= self.radius + tol

    def project(self, w) -> np.ndarray:
        from .optimize import project_l1, project_l2

        if self.family is Family.L2:
            return project_l2(w, self.radius)
        return project_l1(w, self.radius)


@dataclass(frozen=True)
class ClassSpec:
    """F2 (||w||_2 <= W, ||X_j||_2 <= R) or F1 (||w||_1 <= W, ||X_j||_inf <= R)."""

    family: Family
    W: float
    R: float
    d: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.W < 0 or self.R < 0:
            raise ValueError("W and R must be nonnegative")
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be >= 1")

    @property
    def ball(self) -> BallConstraint:
        return BallConstraint(self.family, self.W)

    @property
    def score_bound(self) -> float:
        """sup ||Xw||_inf over the class, i.e. W * R by the row-norm identity."""
        return self.W * self.R
