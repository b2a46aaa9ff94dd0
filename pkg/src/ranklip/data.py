"""Synthetic ranking data, the ``<rel> qid:<id> <fid>:<val>`` text format, and risk estimates."""
from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, TextIO

import numpy as np

from .linalg import Norm
from .loss import LISTNET


@dataclass(frozen=True)
class RankingInstance:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError(f"X must be m x d and y length m; got {X.shape} and {y.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """n instances with a shared (m, d), stored stacked as X (n, m, d) and Y (n, m)."""

    X: np.ndarray
    Y: np.ndarray
    provenance: dict = field(default_factory=dict)
    qids: Optional[tuple] = None

    def __post_init__(self):
        X, Y = _frozen(self.X), _frozen(self.Y)
        if X.ndim != 3 or Y.ndim != 2 or X.shape[:2] != Y.shape:
            raise ValueError(f"inconsistent shapes X {X.shape}, Y {Y.shape}")
        if X.shape[0] == 0:
            raise ValueError("empty dataset")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @classmethod
    def from_instances(cls, instances: Iterable[RankingInstance], provenance=None, qids=None) -> "Dataset":
        instances = list(instances)
        if not instances:
            raise ValueError("empty dataset")
        shapes = {inst.X.shape for inst in instances}
        if len(shapes) != 1:
            raise ValueError(f"instances disagree on (m, d): {sorted(shapes)}")
        X = np.stack([inst.X for inst in instances])
        Y = np.stack([inst.y for inst in instances])
        return cls(X, Y, dict(provenance or {}), qids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def d(self) -> int:
        return self.X.shape[2]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> RankingInstance:
        return RankingInstance(self.X[i], self.Y[i])

    @property
    def instances(self) -> list:
        return [self[i] for i in range(self.n)]


ROW_FAMILIES = ("l2", "linf")
LABEL_MODES = ("score", "graded")


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic-data parameters.

    Rows are uniform in the ``row_norm`` ball of radius ``R``.  Labels are
    ``beta * X w* + N(0, noise_sigma^2)`` in score mode; graded mode rounds
    ``y_max * exp(t - max t)`` of those scores to integers.  ``w_star`` is
    derived from ``w_star_seed`` when not given, so it is a property of the
    distribution, not of any particular sample.
    """

    m: int = 5
    d: int = 10
    n: int = 100
    row_norm: str = "l2"
    R: float = 1.0
    label_mode: str = "score"
    beta: float = 1.0
    noise_sigma: float = 0.0
    y_max: int = 4
    w_star: Optional[tuple] = None
    w_star_seed: int = 0
    w_star_norm: float = 1.0
    fixed_X: Optional[tuple] = None

    def __post_init__(self):
        if self.m < 1 or self.d < 1 or self.n < 1:
            raise ValueError("m, d, n must be >= 1")
        if self.row_norm not in ROW_FAMILIES:
            raise ValueError(f"row_norm must be one of {ROW_FAMILIES}")
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")
        if not self.R > 0:
            raise ValueError("R must be > 0")
        if self.beta < 0 or self.noise_sigma < 0:
            raise ValueError("beta and noise_sigma must be >= 0")
        if self.label_mode == "graded" and self.y_max < 1:
            raise ValueError("y_max must be >= 1 in graded mode")
        if self.w_star is not None:
            object.__setattr__(self, "w_star", tuple(float(v) for v in self.w_star))
            if len(self.w_star) != self.d:
                raise ValueError("w_star must have length d")
        if self.fixed_X is not None:
            fx = tuple(tuple(float(v) for v in row) for row in self.fixed_X)
            if np.shape(fx) != (self.m, self.d):
                raise ValueError("fixed_X must be m x d")
            object.__setattr__(self, "fixed_X", fx)

    @property
    def row_norm_enum(self) -> Norm:
        return Norm.L2 if self.row_norm == "l2" else Norm.LINF

    def weight_vector(self) -> np.ndarray:
        if self.w_star is not None:
            return np.array(self.w_star)
        rng = np.random.default_rng(self.w_star_seed)
        w = rng.standard_normal(self.d)
        # keep w* in the ball dual to the rows' norm
        scale = np.sum(np.abs(w)) if self.row_norm == "linf" else np.linalg.norm(w)
        return w * (self.w_star_norm / scale)

    def to_dict(self) -> dict:
        return asdict(self)


def _sample_rows(config: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    n, m, d, R = config.n, config.m, config.d, config.R
    if config.fixed_X is not None:
        return np.broadcast_to(np.array(config.fixed_X), (n, m, d)).copy()
    if config.row_norm == "linf":
        return rng.uniform(-R, R, size=(n, m, d))
    Z = rng.standard_normal((n, m, d))
    nrm = np.linalg.norm(Z, axis=2, keepdims=True)
    nrm[nrm == 0] = 1.0
    radius = R * rng.uniform(size=(n, m, 1)) ** (1.0 / d)
    X = Z / nrm * radius
    # guard against the last-ulp overshoot of the rescaling
    norms = np.linalg.norm(X, axis=2, keepdims=True)
    return np.where(norms > R, X * (R / np.maximum(norms, R)), X)


def _seed_repr(seed):
    if seed is None or isinstance(seed, (int, np.integer)):
        return seed if seed is None else int(seed)
    return [int(v) for v in np.atleast_1d(seed)]


def generate_synthetic(config: GeneratorConfig, seed) -> Dataset:
    rng = np.random.default_rng(seed)
    X = _sample_rows(config, rng)
    t = config.beta * (X @ config.weight_vector())
    if config.noise_sigma > 0:
        t = t + config.noise_sigma * rng.standard_normal(t.shape)
    if config.label_mode == "graded":
        Y = np.rint(config.y_max * np.exp(t - t.max(axis=1, keepdims=True)))
    else:
        Y = t
    return Dataset(X, Y, {"generator": config.to_dict(), "seed": _seed_repr(seed)})


class RankingFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _parse_line(line: str, lineno: int):
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    toks = body.split()
    if len(toks) < 2:
        raise RankingFormatError(lineno, "expected '<rel> qid:<id> ...'")
    try:
        rel = float(toks[0])
    except ValueError:
        raise RankingFormatError(lineno, f"non-numeric relevance {toks[0]!r}") from None
    if not toks[1].startswith("qid:") or len(toks[1]) == 4:
        raise RankingFormatError(lineno, f"expected qid:<id>, got {toks[1]!r}")
    qid = toks[1][4:]
    feats = {}
    for tok in toks[2:]:
        fid, sep, val = tok.partition(":")
        if not sep:
            raise RankingFormatError(lineno, f"malformed feature {tok!r}")
        try:
            k = int(fid)
            v = float(val)
        except ValueError:
            raise RankingFormatError(lineno, f"non-numeric feature {tok!r}") from None
        if k < 1:
            raise RankingFormatError(lineno, f"feature ids are 1-indexed, got {k}")
        if not (math.isfinite(v) and math.isfinite(rel)):
            raise RankingFormatError(lineno, "non-finite value")
        feats[k] = v
    return rel, qid, feats


def parse_ranking_file(stream) -> Dataset:
    """Read one document per line, grouped into queries by qid (first-seen order).

    Missing feature ids read as 0 and d is the largest id seen.  Every query
    must have the same number of documents.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    groups: dict = {}
    first_line: dict = {}
    d = 0
    for lineno, line in enumerate(stream, start=1):
        parsed = _parse_line(line, lineno)
        if parsed is None:
            continue
        rel, qid, feats = parsed
        if feats:
            d = max(d, max(feats))
        groups.setdefault(qid, []).append((rel, feats))
        first_line.setdefault(qid, lineno)
    if not groups:
        raise ValueError("no documents found")
    sizes = {q: len(docs) for q, docs in groups.items()}
    if len(set(sizes.values())) != 1:
        raise ValueError(f"queries have differing document counts: {sizes}")
    d = max(d, 1)
    m = next(iter(sizes.values()))
    X = np.zeros((len(groups), m, d))
    Y = np.zeros((len(groups), m))
    for i, docs in enumerate(groups.values()):
        for j, (rel, feats) in enumerate(docs):
            Y[i, j] = rel
            for k, v in feats.items():
                X[i, j, k - 1] = v
    source = getattr(stream, "name", None)
    return Dataset(X, Y, {"source": source}, tuple(groups))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 2**53 else repr(float(v))


def serialize_ranking_file(data: Dataset, stream: TextIO) -> None:
    qids = data.qids or tuple(str(i + 1) for i in range(data.n))
    for i, qid in enumerate(qids):
        for j in range(data.m):
            feats = " ".join(f"{k + 1}:{_fmt(v)}" for k, v in enumerate(data.X[i, j]))
            stream.write(f"{_fmt(data.Y[i, j])} qid:{qid} {feats}\n")


def load_ranking_file(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_ranking_file(fh)


def instance_losses(w, data: Dataset, loss=LISTNET) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (data.d,):
        raise ValueError(f"w has shape {w.shape}, expected ({data.d},)")
    return np.atleast_1d(loss.value(data.X @ w, data.Y))


def empirical_risk(w, data: Dataset, loss=LISTNET) -> float:
    return math.fsum(instance_losses(w, data, loss)) / data.n


def population_risk_mc(w, config: GeneratorConfig, N: int, seed, loss=LISTNET) -> tuple:
    """(mean, standard error) of the loss over N fresh instances."""
    if N < 2:
        raise ValueError("N must be >= 2")
    vals = instance_losses(w, generate_synthetic(replace(config, n=N), seed), loss)
    if np.all(vals == vals[0]):
        return float(vals[0]), 0.0
    return math.fsum(vals) / N, float(np.std(vals, ddof=1) / math.sqrt(N))
