"""Kruskal-Wallis H test with Bonferroni-corrected pairwise verdicts."""

from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass
from typing import Sequence

from scipy.stats import chi2


def average_ranks(values: Sequence[float]) -> tuple[list[float], list[int]]:
    """1-based ranks with ties averaged, plus the size of each tie group."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties: list[int] = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """H statistic (tie-corrected) and its chi-squared p-value."""
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) < 2 for g in groups):
        raise ValueError("every group needs at least two observations")
    pooled = [float(v) for g in groups for v in g]
    total = len(pooled)
    ranks, ties = average_ranks(pooled)
    correction = 1.0 - sum(t ** 3 - t for t in ties) / (total ** 3 - total)
    if correction == 0:
        return 0.0, 1.0
    h = 0.0
    start = 0
    for g in groups:
        rank_sum = sum(ranks[start:start + len(g)])
        h += rank_sum * rank_sum / len(g)
        start += len(g)
    h = 12.0 / (total * (total + 1)) * h - 3.0 * (total + 1)
    h /= correction
    h = max(h, 0.0)
    return h, float(chi2.sf(h, len(groups) - 1))


@dataclass(frozen=True)
class PairVerdict:
    first: int
    second: int
    p: float
    symbol: str  # from the first group's point of view: '+', '-' or '*'


def pairwise_verdicts(groups: Sequence[Sequence[float]], alpha: float = 0.05) -> list[PairVerdict]:
    """Two-group Kruskal-Wallis for every pair at ``alpha / #pairs``;
    direction comes from the medians."""
    pairs = list(itertools.combinations(range(len(groups)), 2))
    level = alpha / len(pairs)
    out = []
    for a, b in pairs:
        _, p = kruskal_wallis([groups[a], groups[b]])
        symbol = "*"
        if p < level:
            ma, mb = statistics.median(groups[a]), statistics.median(groups[b])
            if ma != mb:
                symbol = "+" if ma > mb else "-"
        out.append(PairVerdict(a, b, p, symbol))
    return out


def stat_notation(groups: Sequence[Sequence[float]], alpha: float = 0.05) -> list[str]:
    """Per-group strings like ``2^-3^-4^-`` (groups numbered from 1)."""
    verdicts = pairwise_verdicts(groups, alpha)
    flip = {"+": "-", "-": "+", "*": "*"}
    per = [[] for _ in groups]
    for v in verdicts:
        per[v.first].append((v.second, v.symbol))
        per[v.second].append((v.first, flip[v.symbol]))
    return ["".join(f"{j + 1}^{s}" for j, s in sorted(row)) for row in per]
