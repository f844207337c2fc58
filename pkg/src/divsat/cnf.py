"""CNF data model, DIMACS I/O and clause construction helpers.

Literals are carried as signed DIMACS integers (``3`` is x3, ``-3`` is not-x3)
everywhere outside the solver internals. Variables are 1-indexed in clauses
and 0-indexed in :data:`Assignment` vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

Assignment = tuple[bool, ...]


class CnfError(ValueError):
    """Malformed DIMACS input or an invalid clause."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Literal(NamedTuple):
    var: int
    negated: bool = False

    @classmethod
    def from_int(cls, lit: int) -> "Literal":
        if lit == 0:
            raise CnfError("literal 0 is the clause terminator")
        return cls(abs(lit), lit < 0)

    def __int__(self) -> int:
        return -self.var if self.negated else self.var

    def __invert__(self) -> "Literal":
        return Literal(self.var, not self.negated)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals on pairwise distinct variables."""

    lits: tuple[int, ...]

    def __init__(self, lits: Iterable[int | Literal]):
        ints = tuple(int(lit) for lit in lits)
        if not ints:
            raise CnfError("empty clause")
        if 0 in ints:
            raise CnfError("literal 0 inside clause")
        if len({abs(lit) for lit in ints}) != len(ints):
            raise CnfError(f"clause {ints} repeats a variable")
        object.__setattr__(self, "lits", ints)

    @property
    def literals(self) -> list[Literal]:
        return [Literal.from_int(lit) for lit in self.lits]

    def __len__(self) -> int:
        return len(self.lits)

    def __iter__(self):
        return iter(self.lits)

    def satisfied_by(self, x: Sequence[bool]) -> bool:
        return any(x[abs(lit) - 1] != (lit < 0) for lit in self.lits)

    def __repr__(self) -> str:
        return f"Clause({list(self.lits)})"


@dataclass
class Formula:
    """CNF over ``n`` variables with a stack of temporary clause groups."""

    n: int
    base_clauses: list[Clause] = field(default_factory=list)
    scoped_clauses: list[list[Clause]] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 0:
            raise CnfError(f"negative variable count {self.n}")
        for clause in self.base_clauses:
            self._check_range(clause)

    @property
    def m(self) -> int:
        return len(self.base_clauses)

    def _check_range(self, clause: Clause) -> None:
        for lit in clause.lits:
            if abs(lit) > self.n:
                raise CnfError(f"literal {lit} exceeds n={self.n}")

    def add_clause(self, clause: Clause | Iterable[int]) -> None:
        if not isinstance(clause, Clause):
            clause = Clause(clause)
        self._check_range(clause)
        self.base_clauses.append(clause)

    def push_scope(self, clauses: Iterable[Clause]) -> None:
        group = list(clauses)
        for clause in group:
            self._check_range(clause)
        self.scoped_clauses.append(group)

    def pop_scope(self) -> list[Clause]:
        if not self.scoped_clauses:
            raise RuntimeError("pop_scope on an empty scope stack")
        return self.scoped_clauses.pop()

    def clauses(self) -> list[Clause]:
        """Base clauses followed by every scoped group, oldest first."""
        out = list(self.base_clauses)
        for group in self.scoped_clauses:
            out.extend(group)
        return out

    def num_clauses(self) -> int:
        return self.m + sum(len(g) for g in self.scoped_clauses)

    def evaluate(self, x: Sequence[bool], include_scoped: bool = True) -> bool:
        if len(x) != self.n:
            raise ValueError(f"assignment length {len(x)} != n={self.n}")
        clauses = self.clauses() if include_scoped else self.base_clauses
        return all(c.satisfied_by(x) for c in clauses)

    def copy(self) -> "Formula":
        return Formula(self.n, list(self.base_clauses),
                       [list(g) for g in self.scoped_clauses])

    def same_base(self, other: "Formula") -> bool:
        return self.n == other.n and self.base_clauses == other.base_clauses


def parse_dimacs(text: str | TextIO) -> Formula:
    if not isinstance(text, str):
        text = text.read()
    n = m = None
    clauses: list[Clause] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] == "c" or line[0] == "%":
            continue
        if line[0] == "p":
            if n is not None:
                raise CnfError("duplicate header", lineno)
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise CnfError(f"malformed header {line!r}", lineno)
            try:
                n, m = int(fields[2]), int(fields[3])
            except ValueError:
                raise CnfError(f"malformed header {line!r}", lineno) from None
            if n < 0 or m < 0:
                raise CnfError(f"negative count in header {line!r}", lineno)
            continue
        if n is None:
            raise CnfError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise CnfError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                if not pending:
                    raise CnfError("empty clause", lineno)
                try:
                    clauses.append(Clause(pending))
                except CnfError as exc:
                    raise CnfError(str(exc), lineno) from None
                pending = []
                continue
            if abs(lit) > n:
                raise CnfError(f"literal {lit} exceeds n={n}", lineno)
            if not pending:
                pending_line = lineno
            pending.append(lit)
    if n is None:
        raise CnfError("missing 'p cnf' header")
    if pending:
        raise CnfError("last clause is not zero-terminated", pending_line)
    if len(clauses) != m:
        raise CnfError(f"header declares {m} clauses, found {len(clauses)}")
    return Formula(n, clauses)


def write_dimacs(f: Formula, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.n} {f.m}")
    lines.extend(" ".join(map(str, c.lits)) + " 0" for c in f.base_clauses)
    return "\n".join(lines) + "\n"


def blocking_clause(x: Sequence[bool]) -> Clause:
    """The clause falsified by ``x`` and by no other assignment."""
    return Clause(-(i + 1) if v else i + 1 for i, v in enumerate(x))


def fixing_clauses(fixset: Iterable[tuple[int, bool]]) -> list[Clause]:
    """One unit clause per ``(var, value)`` pair; ``var`` is 1-indexed."""
    return [Clause([var if value else -var]) for var, value in fixset]


def occurrence_counts(f: Formula) -> tuple[list[int], int]:
    """Per-variable literal counts over the base clauses and their total."""
    r = [0] * f.n
    for clause in f.base_clauses:
        for lit in clause.lits:
            r[abs(lit) - 1] += 1
    return r, sum(r)
