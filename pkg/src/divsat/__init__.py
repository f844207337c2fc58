"""Maximally diverse sets of satisfying assignments for CNF formulas."""

from .algorithms import (RunConfig, RunResult, Trajectory, basic_enumeration,
                         bitflip_ea, edo_ea, run_variant)
from .cnf import (Clause, CnfError, Formula, Literal, blocking_clause,
                  fixing_clauses, occurrence_counts, parse_dimacs, write_dimacs)
from .diversity import (Measure, Population, contribution, entropy,
                        least_contributor, max_entropy, normalized)
from .generator import GenConfig, gen_clause, gen_satisfiable
from .solver import (SolveResult, Solver, SolverConfig, enumerate_models,
                     external_solve, solve)

__version__ = "0.1.0"
