"""Batch experiments: instance sets, variant runs, aggregate tables and
plot-ready trajectory CSVs.

Every output except ``timing.csv`` is a deterministic function of the
experiment spec, including the master seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .algorithms import (VARIANTS, AlgorithmError, RunConfig, RunResult,
                         Trajectory, run_variant)
from .cnf import CnfError, Formula, parse_dimacs
from .generator import GenConfig, GenerationError, gen_satisfiable, instance_text
from .solver import SolverConfig, SolverError
from .stats import kruskal_wallis, stat_notation

log = logging.getLogger(__name__)

SCHEMA = "divsat-csv v1"
TRAJECTORY_HEADER = ["iteration", "h1", "h2", "unsat_count", "accepted", "population"]
FAILURE_LIMIT = 0.5


class ExperimentError(RuntimeError):
    pass


def derive_seed(master: int, *parts) -> int:
    key = ":".join(str(p) for p in (master, *parts)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def l_schedule(m: int, m_values: Sequence[int], l_max: int = 10, l_min: int = 4) -> int:
    """Initial fix-set size: ``l_max`` at the smallest m down to ``l_min`` at
    the largest, linear in between and rounded half up."""
    lo, hi = min(m_values), max(m_values)
    if hi == lo:
        return l_max
    t = (m - lo) / (hi - lo)
    return int(math.floor(l_max - t * (l_max - l_min) + 0.5))


def _parse_list(text: str, conv=str) -> list:
    return [conv(tok) for tok in text.replace(",", " ").split()]


@dataclass(frozen=True)
class ExperimentSpec:
    dist: str = "powerlaw"
    n: int = 100
    k: int = 3
    beta: float = 2.75
    m_values: tuple[int, ...] = (210,)
    instances: int = 30
    variants: tuple[str, ...] = VARIANTS
    measure: str = "H1"
    mu: int = 20
    iterations: int = 2000
    l: Optional[int] = None
    l_max: int = 10
    l_min: int = 4
    seed: int = 0
    out_dir: str = "results"
    jobs: int = 1
    max_rejects: int = 1000
    trajectories: bool = True

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instances must be at least 1")
        if not self.m_values:
            raise ValueError("empty m range")
        ms = sorted(self.m_values)
        steps = {b - a for a, b in zip(ms, ms[1:])}
        if len(steps) > 1:
            raise ValueError(f"m range must have a uniform step, got {ms}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}")
        if self.measure not in ("H1", "H2"):
            raise ValueError(f"unknown measure {self.measure!r}")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentSpec":
        """Parse flat ``key = value`` lines; ``#`` starts a comment.

        ``m`` accepts ``start:stop:step`` (inclusive) or a list.
        """
        known = {f.name: f for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key == "m":
                key = "m_values"
            if key not in known:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            values[key] = _coerce(key, value)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def gen_config(self, m: int, index: int) -> GenConfig:
        return GenConfig(n=self.n, m=m, k=self.k, dist=self.dist, beta=self.beta,
                         seed=derive_seed(self.seed, "instance", self.dist, m, index),
                         max_rejects=self.max_rejects)

    def run_config(self, m: int, index: int, variant: str) -> RunConfig:
        l = self.l if self.l is not None else l_schedule(m, self.m_values, self.l_max, self.l_min)
        return RunConfig(variant=variant, mu=self.mu, iterations=self.iterations,
                         l=min(l, self.n), measure=self.measure,
                         seed=derive_seed(self.seed, "run", m, index, variant))


def _coerce(key: str, value: str):
    if key == "m_values":
        if ":" in value:
            start, stop, step = (int(v) for v in value.split(":"))
            return tuple(range(start, stop + 1, step))
        return tuple(_parse_list(value, int))
    if key == "variants":
        return tuple(_parse_list(value))
    if key in ("beta",):
        return float(value)
    if key == "l":
        return None if value.lower() in ("", "auto", "none") else int(value)
    if key == "trajectories":
        return value.lower() in ("1", "true", "yes", "on")
    if key in ("dist", "measure", "out_dir"):
        return value
    return int(value)


@dataclass
class InstanceRun:
    m: int
    index: int
    variant: str
    instance: str
    h1_norm: float = float("nan")
    h2_norm: float = float("nan")
    population: int = 0
    unsat_count: int = 0
    wall: float = 0.0
    error: Optional[str] = None
    trajectory: Optional[Trajectory] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ResultRow:
    m: int
    variant: str
    measure: str
    h1: list[float] = field(default_factory=list)
    h2: list[float] = field(default_factory=list)
    unsat_total: int = 0
    failed: int = 0
    wall: float = 0.0
    stat: str = ""

    @property
    def h1_mean(self) -> float:
        return statistics.fmean(self.h1) if self.h1 else float("nan")

    @property
    def h2_mean(self) -> float:
        return statistics.fmean(self.h2) if self.h2 else float("nan")

    @property
    def h1_median(self) -> float:
        return statistics.median(self.h1) if self.h1 else float("nan")

    @property
    def h2_median(self) -> float:
        return statistics.median(self.h2) if self.h2 else float("nan")

    def fitness_values(self) -> list[float]:
        return self.h1 if self.measure == "H1" else self.h2


def load_or_generate(spec: ExperimentSpec, m: int, index: int,
                     inst_dir: Path) -> tuple[Formula, str]:
    gcfg = spec.gen_config(m, index)
    path = inst_dir / gcfg.filename()
    if path.exists():
        return parse_dimacs(path.read_text()), path.name
    f, rejects = gen_satisfiable(gcfg)
    path.write_text(instance_text(gcfg, f, rejects))
    return f, path.name


def execute_run(f: Formula, cfg: RunConfig, m: int, index: int, name: str,
                keep_trajectory: bool = True) -> InstanceRun:
    out = InstanceRun(m=m, index=index, variant=cfg.variant, instance=name)
    start = time.perf_counter()
    try:
        res = run_variant(f, cfg)
    except (AlgorithmError, SolverError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    else:
        out.h1_norm = min(res.h1_norm, 1.0)
        out.h2_norm = min(res.h2_norm, 1.0)
        out.population = len(res.population)
        out.unsat_count = res.unsat_count
        if keep_trajectory:
            out.trajectory = res.trajectory
    out.wall = time.perf_counter() - start
    return out


def _task(args) -> InstanceRun:
    spec, m, index, variant, inst_dir = args
    try:
        f, name = load_or_generate(spec, m, index, Path(inst_dir))
    except (GenerationError, CnfError) as exc:
        return InstanceRun(m=m, index=index, variant=variant, instance="",
                           error=f"{type(exc).__name__}: {exc}")
    return execute_run(f, spec.run_config(m, index, variant), m, index, name,
                       spec.trajectories)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence],
               comment: str = SCHEMA) -> None:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def trajectory_rows(traj: Trajectory) -> list[list]:
    return [[r.iteration, _fmt(r.h1), _fmt(r.h2), r.unsat_count, int(r.accepted), r.population]
            for r in traj.records]


def aggregate(spec: ExperimentSpec, runs: Sequence[InstanceRun]) -> list[ResultRow]:
    rows: dict[tuple[int, str], ResultRow] = {}
    for m in spec.m_values:
        for v in spec.variants:
            rows[(m, v)] = ResultRow(m=m, variant=v, measure=spec.measure)
    for run in sorted(runs, key=lambda r: (r.m, spec.variants.index(r.variant), r.index)):
        row = rows[(run.m, run.variant)]
        row.wall += run.wall
        if not run.ok:
            row.failed += 1
            continue
        row.h1.append(run.h1_norm)
        row.h2.append(run.h2_norm)
        row.unsat_total += run.unsat_count
    for m in spec.m_values:
        cell = [rows[(m, v)] for v in spec.variants]
        groups = [r.fitness_values() for r in cell]
        if len(groups) >= 2 and all(len(g) >= 2 for g in groups):
            for r, note in zip(cell, stat_notation(groups)):
                r.stat = note
    return [rows[(m, v)] for m in spec.m_values for v in spec.variants]


def write_outputs(spec: ExperimentSpec, out: Path, runs: Sequence[InstanceRun],
                  rows: Sequence[ResultRow]) -> None:
    ordered = sorted(runs, key=lambda r: (r.m, spec.variants.index(r.variant), r.index))
    _write_csv(out / "runs.csv",
               ["m", "variant", "measure", "instance_index", "instance", "h1_norm",
                "h2_norm", "population", "unsat_count", "error"],
               ([r.m, r.variant, spec.measure, r.index, r.instance, _fmt(r.h1_norm),
                 _fmt(r.h2_norm), r.population, r.unsat_count, r.error or ""]
                for r in ordered))
    _write_csv(out / "aggregate.csv",
               ["m", "variant", "measure", "instances_ok", "instances_failed",
                "h1_mean", "h1_median", "h2_mean", "h2_median", "unsat_total", "stat"],
               ([r.m, r.variant, r.measure, len(r.h1), r.failed, _fmt(r.h1_mean),
                 _fmt(r.h1_median), _fmt(r.h2_mean), _fmt(r.h2_median),
                 r.unsat_total, r.stat] for r in rows))
    _write_csv(out / "timing.csv", ["m", "variant", "wall_seconds"],
               ([r.m, r.variant, f"{r.wall:.3f}"] for r in rows),
               comment=f"{SCHEMA} (wall-clock, not reproducible)")
    if not spec.trajectories:
        return
    traj_dir = out / "trajectories"
    traj_dir.mkdir(exist_ok=True)
    for r in ordered:
        if r.trajectory is None:
            continue
        name = f"{r.variant}_{spec.measure}_m{r.m}_i{r.index}.csv"
        _write_csv(traj_dir / name, TRAJECTORY_HEADER,
                   trajectory_rows(r.trajectory))
    emit_plotdata(ordered, spec.measure, out / "plotdata")


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    out = Path(spec.out_dir)
    inst_dir = out / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    # generate instances up front so parallel tasks never race on a file
    for m in spec.m_values:
        for i in range(spec.instances):
            try:
                load_or_generate(spec, m, i, inst_dir)
            except GenerationError as exc:
                log.warning("instance m=%d #%d: %s", m, i, exc)
    tasks = [(spec, m, i, v, str(inst_dir))
             for m in spec.m_values for v in spec.variants for i in range(spec.instances)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            runs = list(pool.map(_task, tasks))
    else:
        runs = [_task(t) for t in tasks]
    for r in runs:
        if not r.ok:
            log.warning("m=%d %s #%d failed: %s", r.m, r.variant, r.index, r.error)
    rows = aggregate(spec, runs)
    write_outputs(spec, out, runs, rows)
    bad = [r for r in rows if r.failed > FAILURE_LIMIT * spec.instances]
    if bad:
        cells = ", ".join(f"m={r.m}/{r.variant} ({r.failed} failed)" for r in bad)
        raise ExperimentError(f"too many failed runs: {cells}")
    return rows


def minmax(values: Sequence[float], lo: float, hi: float) -> list[float]:
    if hi <= lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def mean_series(trajectories: Sequence[Trajectory], name: str) -> list[float]:
    series = [t.series(name) for t in trajectories]
    length = min(len(s) for s in series)
    return [statistics.fmean(s[i] for s in series) for i in range(length)]


def emit_plotdata(runs: Sequence[InstanceRun], measure: str, out: Path) -> list[Path]:
    """Trajectory CSVs ``(iteration, normalized_H, normalized_unsat_count)``.

    Values are min-max scaled jointly over all cells of one variant, so the
    m cells stay comparable on one plot. Writes one file per run and one
    mean file per (variant, m) cell.
    """
    out.mkdir(parents=True, exist_ok=True)
    key = "h1" if measure == "H1" else "h2"
    written = []
    by_variant: dict[str, dict[int, list[InstanceRun]]] = {}
    for r in runs:
        if r.trajectory is not None and len(r.trajectory):
            by_variant.setdefault(r.variant, {}).setdefault(r.m, []).append(r)
    for variant, cells in by_variant.items():
        every = [r.trajectory for rs in cells.values() for r in rs]
        h_all = [v for t in every for v in t.series(key)]
        u_all = [v for t in every for v in t.series("unsat_count")]
        means = {m: (mean_series([r.trajectory for r in rs], key),
                     mean_series([r.trajectory for r in rs], "unsat_count"))
                 for m, rs in cells.items()}
        mh = [v for h, _ in means.values() for v in h]
        mu_ = [v for _, u in means.values() for v in u]
        for m, rs in sorted(cells.items()):
            for r in rs:
                t = r.trajectory
                path = out / f"{variant}_{measure}_m{m}_i{r.index}.csv"
                _write_plot(path, t.series("iteration"),
                            minmax(t.series(key), min(h_all), max(h_all)),
                            minmax(t.series("unsat_count"), min(u_all), max(u_all)))
                written.append(path)
            h, u = means[m]
            iters = rs[0].trajectory.series("iteration")[:len(h)]
            path = out / f"{variant}_{measure}_m{m}_mean.csv"
            _write_plot(path, iters, minmax(h, min(mh), max(mh)),
                        minmax(u, min(mu_), max(mu_)))
            written.append(path)
    return written


def _write_plot(path: Path, iters, h, u) -> None:
    _write_csv(path, ["iteration", "normalized_H", "normalized_unsat_count"],
               ([i, _fmt(a), _fmt(b)] for i, a, b in zip(iters, h, u)))


def read_plotdata(path: Path) -> list[tuple[int, float, float]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [(int(r["iteration"]), float(r["normalized_H"]), float(r["normalized_unsat_count"]))
            for r in reader]


def read_runs(path: Path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def stats_report(rows: Sequence[dict], column: str = "h1_norm") -> str:
    """Kruskal-Wallis per m over the variants found in a runs CSV."""
    cells: dict[str, dict[str, list[float]]] = {}
    order: list[str] = []
    for r in rows:
        if r.get("error"):
            continue
        if r["variant"] not in order:
            order.append(r["variant"])
        cells.setdefault(r["m"], {}).setdefault(r["variant"], []).append(float(r[column]))
    lines = [f"# Kruskal-Wallis on {column}; pairwise alpha = 0.05 / #pairs"]
    for m in sorted(cells, key=int):
        variants = [v for v in order if v in cells[m]]
        groups = [cells[m][v] for v in variants]
        if len(groups) < 2 or any(len(g) < 2 for g in groups):
            lines.append(f"m={m}: not enough data")
            continue
        h, p = kruskal_wallis(groups)
        notes = stat_notation(groups)
        cols = "  ".join(f"{i + 1}:{v} median={statistics.median(g):.3f} [{note}]"
                         for i, (v, g, note) in enumerate(zip(variants, groups, notes)))
        lines.append(f"m={m}: H={h:.4f} p={p:.3g}  {cols}")
    return "\n".join(lines)


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})
