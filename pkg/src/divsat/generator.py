"""Random k-CNF instances with uniform or power-law variable occurrence."""

from __future__ import annotations

import bisect
import itertools
import random
from dataclasses import dataclass
from typing import Optional

from .cnf import Clause, Formula, write_dimacs
from .solver import Solver, SolverConfig


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    n: int = 100
    m: int = 210
    k: int = 3
    dist: str = "powerlaw"
    beta: float = 2.75
    seed: int = 0
    max_rejects: int = 1000

    def __post_init__(self):
        if self.dist not in ("uniform", "powerlaw"):
            raise ValueError(f"unknown distribution {self.dist!r}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if self.dist == "powerlaw" and self.beta <= 2:
            raise ValueError("power-law exponent must exceed 2")

    def filename(self) -> str:
        return f"{self.dist}_n{self.n}_m{self.m}_k{self.k}_seed{self.seed}.cnf"

    def describe(self) -> str:
        beta = f" beta={self.beta}" if self.dist == "powerlaw" else ""
        return (f"divsat GenConfig dist={self.dist} n={self.n} m={self.m} k={self.k}"
                f"{beta} seed={self.seed} max_rejects={self.max_rejects}")


def variable_weights(cfg: GenConfig) -> list[float]:
    """Relative probability of drawing each variable (index 0 is x1)."""
    if cfg.dist == "uniform":
        return [1.0] * cfg.n
    exponent = -1.0 / (cfg.beta - 1.0)
    return [(i + 1) ** exponent for i in range(cfg.n)]


class ClauseSampler:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.cum = list(itertools.accumulate(variable_weights(cfg)))

    def __call__(self, rng: random.Random) -> Clause:
        cfg = self.cfg
        if cfg.dist == "uniform":
            vars_ = rng.sample(range(1, cfg.n + 1), cfg.k)
        else:
            chosen: list[int] = []
            total = self.cum[-1]
            while len(chosen) < cfg.k:
                var = bisect.bisect_right(self.cum, rng.random() * total) + 1
                if var <= cfg.n and var not in chosen:
                    chosen.append(var)
            vars_ = chosen
        return Clause(-v if rng.random() < 0.5 else v for v in vars_)


def gen_clause(cfg: GenConfig, rng: random.Random) -> Clause:
    return ClauseSampler(cfg)(rng)


def gen_formula(cfg: GenConfig, rng: random.Random) -> Formula:
    sample = ClauseSampler(cfg)
    return Formula(cfg.n, [sample(rng) for _ in range(cfg.m)])


def gen_satisfiable(cfg: GenConfig, rng: Optional[random.Random] = None,
                    solver_cfg: Optional[SolverConfig] = None) -> tuple[Formula, int]:
    """First satisfiable whole-formula draw and the number of rejected draws."""
    rng = rng if rng is not None else random.Random(cfg.seed)
    solver_cfg = solver_cfg or SolverConfig(keep_phases=False)
    for rejects in range(cfg.max_rejects + 1):
        f = gen_formula(cfg, rng)
        if Solver(solver_cfg).solve(f).sat:
            return f, rejects
    raise GenerationError(
        f"no satisfiable formula after {cfg.max_rejects + 1} draws "
        f"(n={cfg.n}, m={cfg.m}, {cfg.dist})")


def instance_text(cfg: GenConfig, f: Formula, rejects: int) -> str:
    return write_dimacs(f, comments=[cfg.describe(), f"rejected_draws={rejects}"])
