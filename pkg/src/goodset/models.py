"""Deterministic scorers and finite mixtures of them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

LINKS = ("identity_clipped", "sigmoid")


@dataclass(frozen=True, eq=False)
class Scorer:
    """Linear score on a feature map, pushed into [0, 1] by its link."""

    weights: np.ndarray
    link: str = "identity_clipped"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.link not in LINKS:
            raise ValueError(f"unknown link {self.link!r}")
        w = np.array(self.weights, dtype=float, copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def linear(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights

    def predict(self, x) -> np.ndarray:
        s = self.linear(x)
        if self.link == "sigmoid":
            return expit(s)
        return np.clip(s, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"weights": [float(v) for v in self.weights], "link": self.link}

    @classmethod
    def from_dict(cls, m) -> "Scorer":
        return cls(np.asarray(m["weights"], dtype=float), m.get("link", "identity_clipped"))

    @classmethod
    def zero(cls, dim: int) -> "Scorer":
        return cls(np.zeros(dim))


@dataclass(frozen=True, eq=False)
class ConstantScorer:
    """``f(x) = value`` regardless of features."""

    value: float

    def predict(self, x) -> np.ndarray:
        return np.full(np.asarray(x).shape[0], float(self.value))

    def to_dict(self) -> dict:
        return {"constant": float(self.value)}


@dataclass(frozen=True, eq=False)
class ColumnScorer:
    """Reads predictions from a precomputed vector (e.g. an external risk score).

    Only meaningful on the rows it was built for.
    """

    values: np.ndarray

    def predict(self, x) -> np.ndarray:
        v = np.asarray(self.values, dtype=float)
        if np.asarray(x).shape[0] != v.shape[0]:
            raise ValueError("ColumnScorer applied to a different number of rows")
        return v

    def to_dict(self) -> dict:
        return {"column_values": len(self.values)}


@dataclass(frozen=True, eq=False)
class StochasticModel:
    """Distribution over scorers: draw ``scorers[k]`` with probability ``weights[k]``."""

    scorers: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if len(w) != len(self.scorers) or len(w) == 0:
            raise ValueError("need one weight per scorer")
        if np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
            raise ValueError("weights must be a probability vector")
        w = np.clip(w, 0, None)
        w.setflags(write=False)
        object.__setattr__(self, "scorers", tuple(self.scorers))
        object.__setattr__(self, "weights", w)

    def components(self):
        return zip(self.scorers, self.weights)

    def predict(self, x) -> np.ndarray:
        """Expected prediction ``sum_k w_k f_k(x)``."""
        return sum(w * f.predict(x) for f, w in self.components())

    def predict_all(self, x) -> np.ndarray:
        return np.column_stack([f.predict(x) for f in self.scorers])

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights > 0))

    def compact(self) -> "StochasticModel":
        keep = [k for k, w in enumerate(self.weights) if w > 0]
        w = self.weights[keep]
        return StochasticModel(tuple(self.scorers[k] for k in keep), w / w.sum())

    def to_dict(self) -> dict:
        return {"weights": [float(w) for w in self.weights],
                "scorers": [f.to_dict() for f in self.scorers]}

    @classmethod
    def from_dict(cls, m) -> "StochasticModel":
        return cls(tuple(Scorer.from_dict(s) for s in m["scorers"]), np.asarray(m["weights"]))

    @classmethod
    def point(cls, f) -> "StochasticModel":
        return cls((f,), np.ones(1))
