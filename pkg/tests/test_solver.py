import random
import stat
import sys
import textwrap

import pytest

from divsat.cnf import Clause, Formula
from divsat.solver import (MAX_ENUM_VARS, UNSAT, Sat, Solver, SolverConfig,
                           SolverError, enumerate_models, external_solve,
                           parse_solver_output, solve)
from tests.helpers import brute_models, random_kcnf


def test_contradiction_unsat():
    assert solve(Formula(1, [Clause([1]), Clause([-1])])) == UNSAT


def test_scoped_unit_forces_model():
    f = Formula(2, [Clause([1, 2])])
    f.push_scope([Clause([-1])])
    assert solve(f) == Sat((False, True))
    f.pop_scope()


def test_agrees_with_brute_force():
    rng = random.Random(7)
    sat = 0
    for _ in range(500):
        f = random_kcnf(rng, 10, 42)
        models = brute_models(f)
        res = solve(f)
        assert res.sat == bool(models)
        if res.sat:
            sat += 1
            assert res.model in models
    assert 0 < sat < 500


def test_small_formulas_complete():
    rng = random.Random(11)
    for n in range(1, 13):
        for _ in range(15):
            f = random_kcnf(rng, n, rng.randint(1, 5 * n), k=min(3, n))
            assert solve(f).sat == bool(enumerate_models(f, cap=1))


def test_long_clauses_and_blocking():
    rng = random.Random(3)
    f = random_kcnf(rng, 8, 20)
    models = enumerate_models(f)
    found = set()
    from divsat.cnf import blocking_clause
    while True:
        res = solve(f)
        if not res.sat:
            break
        assert res.model not in found
        found.add(res.model)
        f.push_scope([blocking_clause(res.model)])
    assert found == set(models)


def test_deterministic():
    rng = random.Random(5)
    f = random_kcnf(rng, 60, 200)
    cfg = SolverConfig(seed=4)
    assert solve(f, cfg) == solve(f, cfg)
    s = Solver(cfg)
    assert s.solve(f) == s.solve(f)


def test_keep_phases_changes_starting_point():
    f = Formula(3, [])
    s = Solver(SolverConfig(keep_phases=True))
    f.push_scope([Clause([1]), Clause([2])])
    assert s.solve(f).model == (True, True, False)
    f.pop_scope()
    assert s.solve(f).model == (True, True, False)
    assert Solver().solve(f).model == (False, False, False)


def test_random_freq_still_sound():
    rng = random.Random(2)
    cfg = SolverConfig(random_freq=0.3, seed=9)
    for _ in range(50):
        f = random_kcnf(rng, 12, 45)
        res = solve(f, cfg)
        assert res.sat == bool(enumerate_models(f, cap=1))
        if res.sat:
            assert f.evaluate(res.model)


def test_unassigned_default_false():
    assert solve(Formula(4, [Clause([3])])).model == (False, False, True, False)


def test_enumerate_models_examples():
    assert enumerate_models(Formula(2, [Clause([1, 2])])) == [
        (False, True), (True, False), (True, True)]
    assert enumerate_models(Formula(1, [Clause([1]), Clause([-1])])) == []
    assert len(enumerate_models(Formula(3))) == 8
    assert enumerate_models(Formula(3), cap=2) == [(False, False, False), (False, False, True)]


def test_enumerate_models_refuses_large():
    with pytest.raises(ValueError):
        enumerate_models(Formula(MAX_ENUM_VARS + 1))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(engine="external")
    with pytest.raises(ValueError):
        SolverConfig(var_decay=1.5)


@pytest.mark.parametrize("text, expected", [
    ("s SATISFIABLE\nv 1 -2 0\n", (True, [True, False])),
    ("SAT\n-1 2 0\n", (True, [False, True])),
    ("s UNSATISFIABLE\n", (False, None)),
    ("UNSAT\n", (False, None)),
    ("c hello\ns SATISFIABLE\nv 1\nv 2 0\n", (True, [True, True])),
])
def test_parse_solver_output(text, expected):
    assert parse_solver_output(text, 2) == expected


def test_parse_solver_output_out_of_range():
    with pytest.raises(SolverError, match="x3"):
        parse_solver_output("s SATISFIABLE\nv 1 3 0\n", 2)


def _script(tmp_path, body):
    path = tmp_path / "fake_solver.py"
    path.write_text(f"#!{sys.executable}\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_external_solve_uses_builtin_as_subprocess(tmp_path):
    # a real solver process: this package's own CLI
    cmd = f"{sys.executable} -m divsat solve"
    f = Formula(3, [Clause([1, 2]), Clause([-1]), Clause([2, 3])])
    res = external_solve(f, cmd)
    assert res.sat and f.evaluate(res.model)
    f.push_scope([Clause([-2])])
    assert external_solve(f, cmd) == UNSAT
    cfg = SolverConfig(engine="external", command=cmd)
    assert solve(f, cfg) == UNSAT


def test_external_solve_rejects_non_model(tmp_path):
    cmd = _script(tmp_path, """
        print("s SATISFIABLE")
        print("v -1 -2 0")
    """)
    with pytest.raises(SolverError, match="not a model"):
        external_solve(Formula(2, [Clause([1, 2])]), cmd)


def test_external_solve_rejects_out_of_range(tmp_path):
    cmd = _script(tmp_path, """
        print("SAT")
        print("1 2 3 0")
    """)
    with pytest.raises(SolverError, match="x3"):
        external_solve(Formula(2, [Clause([1, 2])]), cmd)


def test_external_solve_failure(tmp_path):
    cmd = _script(tmp_path, """
        import sys
        sys.exit(1)
    """)
    with pytest.raises(SolverError, match="without a status"):
        external_solve(Formula(1, [Clause([1])]), cmd)
    with pytest.raises(SolverError):
        external_solve(Formula(1, [Clause([1])]), str(tmp_path / "missing"))
