"""Complete SAT solving: a built-in CDCL engine, an external-process adapter
and a brute-force model enumerator used as a test oracle.

The CDCL engine uses two watched literals, VSIDS-style activity branching,
first-UIP learning and geometric restarts. It has no randomness unless
``random_freq`` is set, so a result is a function of the clause list and the
solver's saved phases.
"""

from __future__ import annotations

import heapq
import itertools
import os
import random
import re
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from .cnf import Assignment, Formula, write_dimacs

MAX_ENUM_VARS = 25


class SolverError(RuntimeError):
    """The solver failed to produce a trustworthy answer (not UNSAT)."""


@dataclass(frozen=True)
class SolveResult:
    model: Optional[Assignment] = None

    @property
    def sat(self) -> bool:
        return self.model is not None

    def __bool__(self) -> bool:
        return self.sat

    def __repr__(self) -> str:
        if self.model is None:
            return "Unsat"
        return "Sat(" + "".join("1" if v else "0" for v in self.model) + ")"


UNSAT = SolveResult(None)


def Sat(model: Sequence[bool]) -> SolveResult:
    return SolveResult(tuple(bool(v) for v in model))


@dataclass(frozen=True)
class SolverConfig:
    """Engine selection and built-in heuristic parameters.

    Saved phases start all-False. ``keep_phases`` makes a :class:`Solver`
    start each search from the phases its previous search ended with; that
    breaks replay of a model from its clause list alone, so it is off by
    default.
    """

    engine: str = "builtin"
    command: Optional[str] = None
    seed: int = 0
    var_decay: float = 0.95
    restart_first: int = 100
    restart_inc: float = 1.5
    random_freq: float = 0.0
    keep_phases: bool = False

    def __post_init__(self):
        if self.engine not in ("builtin", "external"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "external" and not self.command:
            raise ValueError("external engine needs a command")
        if not 0.0 < self.var_decay < 1.0:
            raise ValueError("var_decay must be in (0, 1)")
        if self.restart_first < 1 or self.restart_inc < 1.0:
            raise ValueError("bad restart schedule")


class _Search:
    """One CDCL search over a fixed clause list.

    Literal codes: ``2*v`` is variable ``v`` (0-based) true, ``2*v+1`` false.
    Literal values: 1 true, -1 false, 0 unassigned.
    """

    def __init__(self, n: int, clauses: Sequence[Sequence[int]],
                 cfg: SolverConfig, phase: Optional[list[bool]] = None):
        self.n = n
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.val = [0] * (2 * n)
        self.level = [0] * n
        self.reason: list[int] = [-1] * n
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity = [0.0] * n
        self.var_inc = 1.0
        self.phase = list(phase) if phase is not None else [False] * n
        self.heap = [(-0.0, v) for v in range(n)]
        self.in_heap = [True] * n
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n)]
        self.units: list[int] = []
        self.conflicts = 0
        for clause in clauses:
            lits = [2 * (abs(l) - 1) + (l < 0) for l in clause]
            if len(lits) == 1:
                self.units.append(lits[0])
            else:
                self._attach(lits)

    def _attach(self, lits: list[int]) -> int:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)
        return ci

    def _enqueue(self, lit: int, reason: int) -> None:
        v = lit >> 1
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        val, clauses, watches, trail = self.val, self.clauses, self.watches, self.trail
        level, reason = self.level, self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                first = c[0]
                if first == false_lit:
                    first = c[1]
                    c[0] = first
                    c[1] = false_lit
                if val[first] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if val[first] == -1:
                        ws[j:j + end - i] = ws[i:end]
                        del ws[j + end - i:]
                        self.qhead = len(trail)
                        return ci
                    val[first] = 1
                    val[first ^ 1] = -1
                    v = first >> 1
                    level[v] = dl
                    reason[v] = ci
                    trail.append(first)
            del ws[j:]
        self.qhead = qhead
        return -1

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(self.n):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(self.n) if self.in_heap[u]]
            heapq.heapify(self.heap)
        elif self.in_heap[v]:
            heapq.heappush(self.heap, (-act[v], v))

    def _redundant(self, q: int, marked: list[bool]) -> bool:
        """``q`` is implied by literals already in the learnt clause."""
        r = self.reason[q >> 1]
        if r < 0:
            return False
        for lit in self.clauses[r]:
            v = lit >> 1
            if v != q >> 1 and not marked[v] and self.level[v] > 0:
                return False
        return True

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = [False] * self.n
        level, reason, trail = self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        learnt = [-1]
        counter = 0
        p = -1
        idx = len(trail) - 1
        c = self.clauses[confl]
        while True:
            for q in c:
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= dl:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            seen[p >> 1] = False
            counter -= 1
            if counter == 0:
                break
            c = self.clauses[reason[p >> 1]]
        learnt[0] = p ^ 1
        if len(learnt) > 2:
            learnt = [learnt[0]] + [q for q in learnt[1:] if not self._redundant(q, seen)]
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val, phase, act, heap = self.val, self.phase, self.activity, self.heap
        in_heap, reason = self.in_heap, self.reason
        start = self.trail_lim[lvl]
        trail = self.trail
        for t in range(len(trail) - 1, start - 1, -1):
            lit = trail[t]
            v = lit >> 1
            phase[v] = not (lit & 1)
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = -1
            if not in_heap[v]:
                in_heap[v] = True
                heapq.heappush(heap, (-act[v], v))
        del trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    def _pick(self) -> int:
        val, act, heap, in_heap = self.val, self.activity, self.heap, self.in_heap
        if self.cfg.random_freq > 0 and self.rng.random() < self.cfg.random_freq:
            free = [v for v in range(self.n) if val[2 * v] == 0]
            if free:
                v = free[self.rng.randrange(len(free))]
                return 2 * v + (not self.phase[v])
        while heap:
            neg_act, v = heapq.heappop(heap)
            if -neg_act != act[v]:
                continue
            in_heap[v] = False
            if val[2 * v] == 0:
                return 2 * v + (not self.phase[v])
        return -1

    def run(self) -> Optional[list[bool]]:
        for lit in self.units:
            if self.val[lit] == -1:
                return None
            if self.val[lit] == 0:
                self._enqueue(lit, -1)
        if self._propagate() >= 0:
            return None
        restart_limit = float(self.cfg.restart_first)
        since_restart = 0
        decay = self.cfg.var_decay
        while True:
            confl = self._propagate()
            if confl >= 0:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return None
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    self._enqueue(learnt[0], self._attach(learnt))
                self.var_inc /= decay
                continue
            if since_restart >= restart_limit:
                since_restart = 0
                restart_limit *= self.cfg.restart_inc
                self._cancel_until(0)
                continue
            lit = self._pick()
            if lit < 0:
                model = [self.val[2 * v] == 1 for v in range(self.n)]
                for v in range(self.n):
                    self.phase[v] = model[v]
                return model
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, -1)


class Solver:
    """A solver instance confined to one algorithm run.

    With ``cfg.keep_phases`` the phases saved by one search seed the next, the
    way an incremental CDCL solver behaves across calls; results then depend
    on the sequence of formulas solved.
    """

    def __init__(self, cfg: Optional[SolverConfig] = None):
        self.cfg = cfg or SolverConfig()
        self.phases: Optional[list[bool]] = None
        self.calls = 0

    def reset(self) -> None:
        self.phases = None

    def solve(self, f: Formula) -> SolveResult:
        self.calls += 1
        if self.cfg.engine == "external":
            return external_solve(f, self.cfg.command)
        clauses = [c.lits for c in f.clauses()]
        phase = self.phases if self.cfg.keep_phases else None
        if phase is not None and len(phase) != f.n:
            phase = None
        search = _Search(f.n, clauses, self.cfg, phase)
        model = search.run()
        if self.cfg.keep_phases:
            self.phases = search.phase
        if model is None:
            return UNSAT
        if not f.evaluate(model):
            raise SolverError("built-in engine produced a non-model")
        return Sat(model)


def solve(f: Formula, cfg: Optional[SolverConfig] = None) -> SolveResult:
    """Decide ``f`` (base and scoped clauses) with a fresh solver."""
    return Solver(cfg).solve(f)


def enumerate_models(f: Formula, cap: Optional[int] = None) -> list[Assignment]:
    """All models of ``f`` in lexicographic order (False < True), brute force."""
    if f.n > MAX_ENUM_VARS:
        raise ValueError(f"refusing to enumerate 2^{f.n} assignments")
    clauses = [c.lits for c in f.clauses()]
    out: list[Assignment] = []
    for x in itertools.product((False, True), repeat=f.n):
        if all(any(x[abs(l) - 1] != (l < 0) for l in c) for c in clauses):
            out.append(x)
            if cap is not None and len(out) >= cap:
                break
    return out


_STATUS_RE = re.compile(r"^(?:s\s+)?(UNSATISFIABLE|SATISFIABLE|UNSAT|SAT)\s*$")


def parse_solver_output(text: str, n: int) -> tuple[Optional[bool], Optional[list[bool]]]:
    """Parse SAT-competition style output into ``(status, model)``.

    ``status`` is None when no status line was recognised. Model literals may
    be spread over several ``v`` lines or given bare after the status line.
    """
    status = None
    lits: list[int] = []
    terminated = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        m = _STATUS_RE.match(line)
        if m:
            status = m.group(1) in ("SATISFIABLE", "SAT")
            continue
        if line.startswith("v"):
            line = line[1:]
        elif status is None:
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise SolverError(f"unparsable model token {tok!r}") from None
            if lit == 0:
                terminated = True
                break
            if abs(lit) > n:
                raise SolverError(f"model mentions x{abs(lit)} but n={n}")
            lits.append(lit)
    if not status:
        return status, None
    if not terminated and not lits:
        raise SolverError("SAT reported without a model line")
    model = [False] * n
    for lit in lits:
        model[abs(lit) - 1] = lit > 0
    return status, model


def external_solve(f: Formula, command: str) -> SolveResult:
    """Run ``<command> <file.cnf>`` and verify whatever it claims."""
    flat = Formula(f.n, f.clauses())
    fd, path = tempfile.mkstemp(suffix=".cnf")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(write_dimacs(flat))
        try:
            proc = subprocess.run([*command.split(), path], capture_output=True,
                                  text=True, check=False)
        except OSError as exc:
            raise SolverError(f"cannot run {command!r}: {exc}") from exc
    finally:
        os.unlink(path)
    status, model = parse_solver_output(proc.stdout, f.n)
    if status is None:
        raise SolverError(f"{command!r} exited {proc.returncode} without a status line")
    if not status:
        return UNSAT
    if not flat.evaluate(model):
        raise SolverError(f"{command!r} returned an assignment that is not a model")
    return Sat(model)
