import itertools
import random

import pytest

from divsat.algorithms import (AlgorithmError, RunConfig, UnsatisfiableFormula,
                               basic_enumeration, bitflip_ea, edo_ea, run_variant)
from divsat.cnf import Clause, Formula, fixing_clauses
from divsat.diversity import Measure, Population, entropy, least_contributor
from divsat.generator import GenConfig, gen_satisfiable
from divsat.solver import enumerate_models, solve
from tests.helpers import random_kcnf


def three_model_formula():
    f = Formula(2, [Clause([1, 2])])
    assert len(enumerate_models(f)) == 3
    return f


def test_basic_exhausts_three_models():
    f = three_model_formula()
    res = basic_enumeration(f, RunConfig(variant="basic", mu=20))
    assert sorted(res.models) == enumerate_models(f)
    assert res.solver_calls == 4  # three models, then UNSAT
    assert f.scoped_clauses == [] and f.m == 1


def test_basic_unconstrained_gives_mu_distinct():
    res = basic_enumeration(Formula(5), RunConfig(variant="basic", mu=20))
    assert len(res.models) == 20 == len(set(res.models))


def test_bitflip_requires_satisfiable():
    f = Formula(1, [Clause([1]), Clause([-1])])
    with pytest.raises(UnsatisfiableFormula):
        bitflip_ea(f, RunConfig(variant="bitflip", iterations=5))
    with pytest.raises(UnsatisfiableFormula):
        edo_ea(f, RunConfig(variant="edo_mutation", iterations=5, l=1))


def test_duplicate_insert_leaves_entropy_unchanged():
    rng = random.Random(0)
    members = [tuple(rng.random() < 0.4 for _ in range(12)) for _ in range(6)]
    p = Population(12, 6, members)
    m = Measure.h1(12)
    before = entropy(p, m)
    p.add(members[2])
    idx = least_contributor(p, m)
    p.remove(idx)
    assert entropy(p, m) == pytest.approx(before, abs=1e-12)
    assert idx in (2, 6)


@pytest.mark.parametrize("variant", ["bitflip", "edo_mutation", "edo_crossover"])
@pytest.mark.parametrize("measure", ["H1", "H2"])
def test_ea_invariants(variant, measure):
    f, _ = gen_satisfiable(GenConfig(n=40, m=120, dist="uniform", seed=3))
    original = [c.lits for c in f.base_clauses]
    cfg = RunConfig(variant=variant, mu=8, iterations=150, l=5, measure=measure, seed=1)
    res = run_variant(f, cfg)
    assert [c.lits for c in f.base_clauses] == original and f.scoped_clauses == []
    assert len(res.population) == 8
    for x in res.models:
        assert f.evaluate(x)
    recs = res.trajectory.records
    assert [r.iteration for r in recs] == list(range(1, 151))
    unsat = [r.unsat_count for r in recs]
    assert all(b - a in (0, 1) for a, b in zip(unsat, unsat[1:]))
    assert unsat[-1] == res.unsat_count
    fit = [r.h1 if measure == "H1" else r.h2 for r in recs]
    full = [h for h, r in zip(fit, recs) if r.population == 8]
    assert len(full) > 100
    assert all(b >= a - 1e-9 for a, b in zip(full, full[1:]))
    if variant != "bitflip":
        assert len(res.fixsets) == len(res.population)


def test_trajectory_unsat_counts_only_evolution():
    f, _ = gen_satisfiable(GenConfig(n=30, m=125, dist="uniform", seed=8))
    res = edo_ea(f, RunConfig(variant="edo_mutation", mu=6, iterations=200, l=8, seed=2))
    init_and_check_calls = 1 + 6  # satisfiability check plus at least mu init solves
    assert res.solver_calls >= init_and_check_calls + 200
    sat_evolution = sum(1 for r in res.trajectory.records if r.accepted)
    assert res.unsat_count + sat_evolution <= 200
    assert res.trajectory.records[-1].unsat_count == res.unsat_count


def test_empty_fixset_iteration_counts():
    # n=1: every bit-flip draw flips the variable; formula forces it, so all UNSAT
    f = Formula(1, [Clause([1])])
    res = bitflip_ea(f, RunConfig(variant="bitflip", mu=2, iterations=10))
    assert res.unsat_count == 10 and len(res.trajectory) == 10
    # n large, probability (1-1/n)^n of no fixes: still an iteration
    f = Formula(50)
    res = bitflip_ea(f, RunConfig(variant="bitflip", mu=3, iterations=30, seed=1))
    assert len(res.trajectory) == 30 and res.unsat_count == 0


def test_edo_fixsets_replay_to_models():
    rng = random.Random(21)
    for trial in range(5):
        f = random_kcnf(rng, 12, 30)
        if not solve(f).sat:
            continue
        res = edo_ea(f, RunConfig(variant="edo_crossover", mu=5, iterations=80, l=3, seed=trial))
        for y, x in zip(res.fixsets, res.models):
            f.push_scope(fixing_clauses(y))
            assert solve(f).model == x
            f.pop_scope()


def test_edo_init_failure_reports_attempts():
    # every variable is forced; a draw fixing all 10 is SAT with probability 1/1024
    f = Formula(10, [Clause([v]) for v in range(1, 11)])
    with pytest.raises(AlgorithmError, match="100 unsatisfiable draws"):
        edo_ea(f, RunConfig(variant="edo_mutation", mu=2, iterations=1, l=10, seed=0))


def test_final_h1_within_exhaustive_optimum():
    rng = random.Random(5)
    checked = 0
    while checked < 4:
        f = random_kcnf(rng, 10, 38)
        models = enumerate_models(f)
        if not 3 <= len(models) <= 8:
            continue
        mu = 4
        m = Measure.h1(10)
        best = max(entropy(Population(10, mu, list(c)), m)
                   for c in itertools.combinations_with_replacement(models, mu))
        for variant in ("bitflip", "edo_mutation", "edo_crossover"):
            res = run_variant(f, RunConfig(variant=variant, mu=mu, iterations=60, l=2, seed=1))
            assert res.h1 <= best + 1e-12
        checked += 1


def test_runs_are_seed_deterministic():
    f, _ = gen_satisfiable(GenConfig(n=50, m=150, seed=2))
    cfg = RunConfig(variant="edo_crossover", mu=10, iterations=100, l=6, seed=7)
    a, b = run_variant(f, cfg), run_variant(f, cfg)
    assert a.models == b.models and a.trajectory == b.trajectory


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(mu=1)
    with pytest.raises(ValueError):
        RunConfig(variant="random")
    with pytest.raises(ValueError):
        RunConfig(l=0)
    with pytest.raises(ValueError):
        edo_ea(Formula(3), RunConfig(variant="bitflip"))


def test_rejects_formula_with_open_scope():
    f = Formula(2)
    f.push_scope([Clause([1])])
    with pytest.raises(ValueError):
        bitflip_ea(f, RunConfig(variant="bitflip"))
