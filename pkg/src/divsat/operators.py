"""Variation operators over assignments and fix-sets.

A fix-set is a tuple of ``(var, value)`` pairs with distinct 1-indexed
variables; the solver completes everything it leaves open.
"""

from __future__ import annotations

import random
from typing import Sequence

FixSet = tuple[tuple[int, bool], ...]

ADD, REMOVE, SWITCH = "add", "remove", "switch"
ACTIONS = (ADD, REMOVE, SWITCH)


def check_fixset(y: FixSet, n: int) -> None:
    idx = [var for var, _ in y]
    if len(set(idx)) != len(idx):
        raise ValueError(f"fix-set repeats a variable: {y}")
    if any(not 1 <= var <= n for var in idx):
        raise ValueError(f"fix-set index out of 1..{n}: {y}")


def random_fixset(n: int, size: int, rng: random.Random) -> FixSet:
    """``size`` distinct variables, each with a fair-coin value."""
    vars_ = rng.sample(range(1, n + 1), size)
    return tuple((var, rng.random() < 0.5) for var in vars_)


def bitflip_fixset(x: Sequence[bool], rng: random.Random) -> FixSet:
    """Pick each variable with probability 1/n and fix it to its flipped value."""
    n = len(x)
    return tuple((i + 1, not x[i]) for i in range(n) if rng.random() < 1.0 / n)


def feasible_actions(size: int, n: int) -> list[str]:
    actions = []
    if size < n:
        actions.append(ADD)
    if size > 0:
        actions.append(REMOVE)
    if 0 < size < n:
        actions.append(SWITCH)
    return actions


def fixset_mutation(y: FixSet, n: int, rng: random.Random,
                    action: str | None = None) -> FixSet:
    """Apply one of add / remove / switch, drawn uniformly among the feasible ones.

    ``action`` forces a choice; an infeasible forced action falls back to a
    uniform draw over the feasible ones. Switch keeps the value and moves it
    to a currently unfixed variable.
    """
    feasible = feasible_actions(len(y), n)
    if not feasible:
        return y
    if action is None or action not in feasible:
        action = rng.choice(feasible)
    entries = list(y)
    if action == REMOVE:
        del entries[rng.randrange(len(entries))]
        return tuple(entries)
    fixed = {var for var, _ in entries}
    free = [v for v in range(1, n + 1) if v not in fixed]
    new_var = rng.choice(free)
    if action == ADD:
        entries.append((new_var, rng.random() < 0.5))
    else:
        pos = rng.randrange(len(entries))
        entries[pos] = (new_var, entries[pos][1])
    return tuple(entries)


def fixset_crossover(a: FixSet, b: FixSet, rng: random.Random) -> FixSet:
    """Uniform crossover after padding the shorter parent with empty cells."""
    length = max(len(a), len(b))
    child: list[tuple[int, bool]] = []
    taken: set[int] = set()
    for pos in range(length):
        cell = a[pos] if pos < len(a) else None
        if rng.random() >= 0.5:
            cell = b[pos] if pos < len(b) else None
        if cell is None or cell[0] in taken:
            continue
        taken.add(cell[0])
        child.append(cell)
    return tuple(child)
