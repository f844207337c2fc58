"""Diverse model sets: blocking-clause enumeration, a bit-flip EA and the
fix-set EDO algorithm with mutation-only and crossover+mutation variants."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Optional

from .cnf import Assignment, Formula, blocking_clause, fixing_clauses
from .diversity import (Measure, Population, entropy, least_contributor,
                        normalized)
from .operators import (FixSet, bitflip_fixset, fixset_crossover,
                        fixset_mutation, random_fixset)
from .solver import SolveResult, Solver, SolverConfig

log = logging.getLogger(__name__)

VARIANTS = ("basic", "bitflip", "edo_mutation", "edo_crossover")
INIT_ATTEMPTS_PER_MEMBER = 50


class AlgorithmError(RuntimeError):
    pass


class UnsatisfiableFormula(AlgorithmError):
    pass


@dataclass(frozen=True)
class RunConfig:
    variant: str = "edo_mutation"
    mu: int = 20
    iterations: int = 2000
    l: int = 10
    measure: str = "H1"
    seed: int = 0
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.mu < 2:
            raise ValueError("mu must be at least 2")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if self.measure not in ("H1", "H2"):
            raise ValueError(f"unknown measure {self.measure!r}")


@dataclass(frozen=True)
class Record:
    iteration: int
    h1: float
    h2: float
    unsat_count: int
    accepted: bool
    population: int


@dataclass
class Trajectory:
    records: list[Record] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, *args) -> None:
        self.records.append(Record(*args))

    def series(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]


@dataclass
class RunResult:
    config: RunConfig
    population: Population
    trajectory: Trajectory
    h1: float
    h2: float
    h1_norm: float
    h2_norm: float
    fixsets: Optional[list[FixSet]] = None
    unsat_count: int = 0
    solver_calls: int = 0

    @property
    def models(self) -> list[Assignment]:
        return self.population.members

    def fitness(self) -> float:
        return self.h1 if self.config.measure == "H1" else self.h2


class _Run:
    """Shared state for one algorithm execution on one formula."""

    def __init__(self, f: Formula, cfg: RunConfig):
        if f.scoped_clauses:
            raise ValueError("formula carries temporary clauses; pop them first")
        self.f = f
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.solver = Solver(cfg.solver)
        self.h1_measure = Measure.for_formula("H1", f)
        self.h2_measure = Measure.for_formula("H2", f)
        self.fitness_measure = self.h1_measure if cfg.measure == "H1" else self.h2_measure
        self.pop = Population(f.n, cfg.mu)
        self.trajectory = Trajectory()
        self.unsat = 0

    def solve_with(self, fixset: FixSet) -> SolveResult:
        self.f.push_scope(fixing_clauses(fixset))
        try:
            return self.solver.solve(self.f)
        finally:
            self.f.pop_scope()

    def insert(self, x: Assignment) -> tuple[bool, Optional[int]]:
        """Add ``x``; past capacity drop the least contributor. Returns
        (offspring kept, index removed)."""
        self.pop.add(x)
        if len(self.pop) <= self.cfg.mu:
            return True, None
        idx = least_contributor(self.pop, self.fitness_measure)
        kept = idx != len(self.pop) - 1
        self.pop.remove(idx)
        return kept, idx

    def record(self, iteration: int, accepted: bool) -> None:
        if len(self.pop):
            h1 = entropy(self.pop, self.h1_measure)
            h2 = entropy(self.pop, self.h2_measure)
        else:
            h1 = h2 = 0.0
        self.trajectory.append(iteration, h1, h2, self.unsat, accepted, len(self.pop))

    def result(self, fixsets: Optional[list[FixSet]] = None) -> RunResult:
        for x in self.pop.members:
            if not self.f.evaluate(x, include_scoped=False):
                raise AlgorithmError("population member violates the formula")
        if len(self.pop):
            h1 = entropy(self.pop, self.h1_measure)
            h2 = entropy(self.pop, self.h2_measure)
        else:
            h1 = h2 = 0.0
        return RunResult(
            config=self.cfg, population=self.pop, trajectory=self.trajectory,
            h1=h1, h2=h2,
            h1_norm=normalized(h1, self.h1_measure),
            h2_norm=normalized(h2, self.h2_measure),
            fixsets=fixsets, unsat_count=self.unsat,
            solver_calls=self.solver.calls)


def basic_enumeration(f: Formula, cfg: RunConfig) -> RunResult:
    """Solve, block the model, repeat until ``mu`` models or UNSAT."""
    run = _Run(f, cfg)
    pushed = 0
    try:
        while len(run.pop) < cfg.mu:
            res = run.solver.solve(f)
            if not res.sat:
                break
            run.pop.add(res.model)
            f.push_scope([blocking_clause(res.model)])
            pushed += 1
            run.record(len(run.pop), True)
    finally:
        for _ in range(pushed):
            f.pop_scope()
    return run.result()


def bitflip_ea(f: Formula, cfg: RunConfig) -> RunResult:
    """Steady-state EA: fix flipped bits of a random member, let the solver
    complete the rest."""
    run = _Run(f, cfg)
    first = run.solver.solve(f)
    if not first.sat:
        raise UnsatisfiableFormula("formula unsatisfiable")
    run.pop.add(first.model)
    for it in range(1, cfg.iterations + 1):
        parent = run.pop.members[run.rng.randrange(len(run.pop))]
        res = run.solve_with(bitflip_fixset(parent, run.rng))
        accepted = False
        if res.sat:
            accepted, _ = run.insert(res.model)
        else:
            run.unsat += 1
        run.record(it, accepted)
    return run.result()


def initialize_fixsets(run: _Run) -> list[FixSet]:
    cfg, n = run.cfg, run.f.n
    size = min(cfg.l, n)
    fixsets: list[FixSet] = []
    failures = 0
    limit = INIT_ATTEMPTS_PER_MEMBER * cfg.mu
    while len(run.pop) < cfg.mu:
        y = random_fixset(n, size, run.rng)
        res = run.solve_with(y)
        if res.sat:
            run.pop.add(res.model)
            fixsets.append(y)
            continue
        failures += 1
        if failures >= limit:
            raise AlgorithmError(
                f"initialisation found {len(run.pop)}/{cfg.mu} members after "
                f"{failures} unsatisfiable draws of {size} fixed variables")
    return fixsets


def edo_ea(f: Formula, cfg: RunConfig) -> RunResult:
    """EDO over fix-sets; every member is the solver's completion of its fix-set."""
    if cfg.variant not in ("edo_mutation", "edo_crossover"):
        raise ValueError(f"edo_ea cannot run variant {cfg.variant!r}")
    run = _Run(f, cfg)
    if not run.solver.solve(f).sat:
        raise UnsatisfiableFormula("formula unsatisfiable")
    run.solver.reset()
    fixsets = initialize_fixsets(run)
    n, rng = f.n, run.rng
    crossover = cfg.variant == "edo_crossover"
    for it in range(1, cfg.iterations + 1):
        if crossover:
            i, j = rng.sample(range(len(fixsets)), 2)
            child = fixset_crossover(fixsets[i], fixsets[j], rng)
        else:
            child = fixsets[rng.randrange(len(fixsets))]
        child = fixset_mutation(child, n, rng)
        res = run.solve_with(child)
        accepted = False
        if res.sat:
            fixsets.append(child)
            accepted, idx = run.insert(res.model)
            if idx is not None:
                del fixsets[idx]
        else:
            run.unsat += 1
        run.record(it, accepted)
    return run.result(fixsets)


def run_variant(f: Formula, cfg: RunConfig) -> RunResult:
    if cfg.variant == "basic":
        return basic_enumeration(f, cfg)
    if cfg.variant == "bitflip":
        return bitflip_ea(f, cfg)
    return edo_ea(f, cfg)
