"""Entropy-based population diversity.

A variable's contribution is ``-(f/mu) ln(f/mu)`` where ``f`` counts the
members assigning it True; H1 sums contributions, H2 weights each by the
variable's occurrence count in the formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .cnf import Assignment, Formula, occurrence_counts

E_INV = math.exp(-1.0)

# relative slack under which two removal scores count as tied
TIE_RTOL = 1e-12


def contribution(f_i: int, mu: int) -> float:
    if mu < 1 or not 0 <= f_i <= mu:
        raise ValueError(f"need 0 <= f <= mu and mu >= 1, got f={f_i}, mu={mu}")
    if f_i == 0:
        return 0.0
    p = f_i / mu
    return -p * math.log(p)


def _contributions(counts: np.ndarray, size: int) -> np.ndarray:
    p = counts / size
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log(p)
    return np.where(counts > 0, h, 0.0)


@dataclass(frozen=True)
class Measure:
    kind: str
    n: int
    weights: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("H1", "H2"):
            raise ValueError(f"unknown measure {self.kind!r}")
        if self.kind == "H2":
            if self.weights is None or len(self.weights) != self.n:
                raise ValueError("H2 needs one occurrence count per variable")

    @classmethod
    def h1(cls, n: int) -> "Measure":
        return cls("H1", n)

    @classmethod
    def h2(cls, r: Sequence[int]) -> "Measure":
        return cls("H2", len(r), tuple(int(v) for v in r))

    @classmethod
    def for_formula(cls, kind: str, f: Formula) -> "Measure":
        if kind == "H1":
            return cls.h1(f.n)
        return cls.h2(occurrence_counts(f)[0])

    @property
    def total_literals(self) -> int:
        return sum(self.weights) if self.weights is not None else self.n

    def weight_vector(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.n)
        return np.asarray(self.weights, dtype=float)


@dataclass
class Population:
    """Assignments plus a per-variable True count kept in sync on every edit."""

    n: int
    mu: int
    members: list[Assignment] = field(default_factory=list)
    true_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.mu < 1:
            raise ValueError("mu must be positive")
        self.true_counts = np.zeros(self.n, dtype=np.int64)
        members, self.members = self.members, []
        for x in members:
            self.add(x)

    def __len__(self) -> int:
        return len(self.members)

    def add(self, x: Sequence[bool]) -> None:
        x = tuple(bool(v) for v in x)
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != n={self.n}")
        self.members.append(x)
        self.true_counts += np.asarray(x, dtype=np.int64)

    def remove(self, index: int) -> Assignment:
        x = self.members.pop(index)
        self.true_counts -= np.asarray(x, dtype=np.int64)
        return x

    def matrix(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64).reshape(len(self.members), self.n)


def entropy_from_counts(counts: Sequence[int], size: int, m: Measure) -> float:
    if size < 1:
        raise ValueError("entropy of an empty population")
    h = _contributions(np.asarray(counts, dtype=float), size)
    return float(np.dot(m.weight_vector(), h))


def entropy(p: Population, m: Measure) -> float:
    """Diversity of ``p``; frequencies are taken relative to ``len(p)``."""
    return entropy_from_counts(p.true_counts, len(p), m)


def max_entropy(m: Measure) -> float:
    """Weighted variable count times the peak contribution ``1/e``."""
    return m.total_literals * E_INV


def normalized(h_val: float, m: Measure, clamp: bool = False) -> float:
    if h_val < 0:
        raise ValueError("negative entropy")
    value = h_val / max_entropy(m) if max_entropy(m) > 0 else 0.0
    return min(value, 1.0) if clamp else value


def removal_scores(p: Population, m: Measure) -> np.ndarray:
    """Entropy of the population with each single member removed."""
    k = len(p)
    if k < 2:
        raise ValueError("need at least two members")
    counts = p.true_counts[None, :] - p.matrix()
    h = _contributions(counts.astype(float), k - 1)
    return h @ m.weight_vector()


def least_contributor(p: Population, m: Measure) -> int:
    """Index whose removal leaves the most diverse population.

    Ties go to the largest index, so a freshly appended offspring that adds
    nothing is the one discarded.
    """
    scores = removal_scores(p, m)
    best = float(scores.max())
    tol = TIE_RTOL * max(abs(best), 1.0)
    return int(np.flatnonzero(scores >= best - tol)[-1])


def entropies(p: Population, measures: Iterable[Measure]) -> list[float]:
    return [entropy(p, m) for m in measures]
