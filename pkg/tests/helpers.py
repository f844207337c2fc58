import random

from divsat.cnf import Clause, Formula


def random_kcnf(rng: random.Random, n: int, m: int, k: int = 3) -> Formula:
    clauses = []
    for _ in range(m):
        vars_ = rng.sample(range(1, n + 1), k)
        clauses.append(Clause(v if rng.random() < 0.5 else -v for v in vars_))
    return Formula(n, clauses)


def brute_models(f: Formula) -> list[tuple[bool, ...]]:
    """Independent model list: evaluates every assignment through Formula.evaluate."""
    out = []
    for bits in range(2 ** f.n):
        x = tuple(bool((bits >> (f.n - 1 - i)) & 1) for i in range(f.n))
        if f.evaluate(x):
            out.append(x)
    return out
