"""Experiment harness: algorithm x problem x noise x seed matrix, profile
areas, and reliability percentages.

Success of a run is adjudicated on ground truth: the noiseless criticality
norm recomputed at the final iterate must reach the tolerance. Under noise
the solver's own stopping signal sees perturbed gradients, so self-reported
convergence would be meaningless at high noise; at zero noise the two
criteria coincide.

The performance metric is the area under the performance-profile curve for
ratio abscissa [0, 10], normalized by 10: for each problem the cost is the
iteration count relative to the best algorithm; an algorithm solving every
problem at the best cost scores 0.9 + 1/10 of nothing lost, and failures
contribute zero.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .criticality import chi, criticality_norm
from .oracle import NoiseSpec, Problem
from .problems import DESK_SUITE, registry_get
from .solvers import PRESET_NAMES, RunRecord, SolverConfig, preset, solve

__all__ = [
    "ExperimentPlan",
    "ProfileReport",
    "run_plan",
    "convergence_judgment",
    "profile_area",
    "profile_curves",
    "reliability_table",
    "export_report",
    "load_report",
]

REPORT_SCHEMA_VERSION = 1

DEFAULT_NOISE_LEVELS = (0.0, 0.01, 0.05, 0.15, 0.25)


@dataclass
class ExperimentPlan:
    """The benchmark matrix. Zero-noise cells run one seed (they are
    deterministic); noisy cells run `seeds` independent streams."""

    suite: list[tuple[str, int]] = field(default_factory=lambda: list(DESK_SUITE))
    algorithms: list[str] = field(default_factory=lambda: list(PRESET_NAMES))
    noise_levels: list[float] = field(default_factory=lambda: list(DEFAULT_NOISE_LEVELS))
    seeds: int = 10
    base_seed: int = 0
    epsilon: float = 1e-3
    max_iter: int = 100_000
    skip_trinf_above: Optional[float] = 0.05
    workers: int = 1

    def __post_init__(self):
        for algo in self.algorithms:
            if algo not in PRESET_NAMES:
                raise ValueError(f"unknown algorithm preset {algo!r}")
        if self.seeds < 1:
            raise ValueError("seeds must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def is_skipped(self, algorithm: str, noise_level: float) -> bool:
        return (
            algorithm.startswith("trinf")
            and self.skip_trinf_above is not None
            and noise_level > self.skip_trinf_above
        )

    def tasks(self) -> list[tuple[str, int, str, float, int, float, int]]:
        out = []
        for noise in self.noise_levels:
            n_seeds = 1 if noise == 0.0 else self.seeds
            for algo in self.algorithms:
                if self.is_skipped(algo, noise):
                    continue
                for name, dim in self.suite:
                    for i in range(n_seeds):
                        out.append(
                            (name, dim, algo, noise, self.base_seed + i,
                             self.epsilon, self.max_iter)
                        )
        return out


def _run_task(task) -> RunRecord:
    name, dim, algo, noise_level, seed, epsilon, max_iter = task
    problem = registry_get(name, dim)
    config = preset(algo, epsilon=epsilon, max_iter=max_iter, log_level="light")
    noise = NoiseSpec(level=noise_level, seed=seed)
    try:
        return solve(problem, config, noise)
    except Exception as exc:  # a failed run must never abort the plan
        record = RunRecord(
            problem_name=name,
            dim=dim,
            label=config.label,
            config=config,
            noise_level=noise_level,
            seed=seed,
            status="error",
            error=f"{type(exc).__name__}: {exc}",
            final_x=problem.x0.copy(),
        )
        return record


def run_plan(plan: ExperimentPlan, progress=None) -> list[RunRecord]:
    """Execute the matrix; deterministic given the plan, regardless of workers."""
    tasks = plan.tasks()
    records: list[RunRecord]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        records = []
        for task in tasks:
            records.append(_run_task(task))
            if progress is not None:
                progress(len(records), len(tasks), records[-1])
    return records


def convergence_judgment(record: RunRecord, problem: Problem) -> bool:
    """Ground-truth success: noiseless criticality at the final iterate <= epsilon."""
    if record.final_x.shape != (problem.dim,):
        return False
    _, g = problem.oracle(record.final_x)
    crit = criticality_norm(chi(record.final_x, np.asarray(g, float), problem.bounds, 1.0))
    return crit <= record.config.epsilon


def _judgments(records: Iterable[RunRecord]) -> dict[int, bool]:
    problems: dict[tuple[str, int], Problem] = {}
    out = {}
    for rec in records:
        key = (rec.problem_name, rec.dim)
        if key not in problems:
            problems[key] = registry_get(*key)
        out[id(rec)] = convergence_judgment(rec, problems[key])
    return out


def _performance_ratios(
    records: list[RunRecord],
    algorithms: Optional[list[str]] = None,
    judged: Optional[dict[int, bool]] = None,
) -> tuple[list[str], list[tuple[str, int]], dict]:
    """Per (problem, algorithm) performance ratio; inf marks an unsolved cell.

    Cost is iterations to (adjudicated) convergence, averaged over seeds; a
    problem counts as solved by an algorithm only if every seeded run
    succeeded.
    """
    if not records:
        raise ValueError("no records to profile")
    if algorithms is None:
        algorithms = sorted({rec.label for rec in records})
    if judged is None:
        judged = _judgments(records)
    problems = sorted({(rec.problem_name, rec.dim) for rec in records})

    grouped: dict[tuple[tuple[str, int], str], list[RunRecord]] = {}
    for rec in records:
        grouped.setdefault(((rec.problem_name, rec.dim), rec.label), []).append(rec)
    cost = {
        key: float(np.mean([r.iterations for r in runs]))
        for key, runs in grouped.items()
        if all(judged[id(r)] for r in runs)
    }

    ratios: dict = {}
    for prob in problems:
        best = min(
            (cost[(prob, a)] for a in algorithms if (prob, a) in cost),
            default=math.inf,
        )
        for algo in algorithms:
            if (prob, algo) not in cost:
                ratios[(prob, algo)] = math.inf
            else:
                c = cost[(prob, algo)]
                if best == 0.0:
                    ratios[(prob, algo)] = 1.0 if c == 0.0 else math.inf
                else:
                    ratios[(prob, algo)] = c / best
    return algorithms, problems, ratios


def profile_area(
    records: list[RunRecord],
    algorithms: Optional[list[str]] = None,
    judged: Optional[dict[int, bool]] = None,
) -> dict[str, float]:
    """Area of each algorithm's performance-profile curve over t in [0, 10], /10.

    The curve is the fraction of problems with performance ratio <= t; the
    step-function integral is exact. Unsolved problems have infinite ratio
    and contribute nothing.
    """
    algorithms, problems, ratios = _performance_ratios(records, algorithms, judged)
    areas = {}
    n_prob = len(problems)
    for algo in algorithms:
        total = 0.0
        for prob in problems:
            total += max(0.0, 10.0 - ratios[(prob, algo)])
        areas[algo] = total / (10.0 * n_prob)
    return areas


def profile_curves(
    records: list[RunRecord],
    algorithms: Optional[list[str]] = None,
) -> dict[str, list[tuple[float, float]]]:
    """Step-function points (t, fraction solved within ratio t) for t in [0, 10]."""
    algorithms, problems, ratios = _performance_ratios(records, algorithms)
    n_prob = len(problems)
    curves = {}
    for algo in algorithms:
        rs = sorted(ratios[(prob, algo)] for prob in problems)
        points = [(0.0, 0.0)]
        frac = 0.0
        for r in rs:
            if r > 10.0:
                break
            frac += 1.0 / n_prob
            points.append((r, frac))
        points.append((10.0, frac))
        curves[algo] = points
    return curves


@dataclass
class ProfileReport:
    """Per-algorithm profile areas (zero noise) and per-cell reliability."""

    algorithms: list[str]
    noise_levels: list[float]
    areas: dict[str, float]
    reliability: dict[str, dict[str, Optional[float]]]  # noise repr -> algo -> percent
    counts: dict[str, dict[str, int]]


def reliability_table(records: list[RunRecord]) -> ProfileReport:
    """Aggregate records into profile areas and reliability percentages.

    Reliability of a cell is the percentage of problems adjudicated solved,
    averaged over seeds, rounded to one decimal. Cells with no records
    (e.g. skipped baseline runs at high noise) are reported as None.
    """
    if not records:
        raise ValueError("no records to aggregate")
    judged = _judgments(records)
    algorithms = sorted({rec.label for rec in records})
    noise_levels = sorted({rec.noise_level for rec in records})

    reliability: dict[str, dict[str, Optional[float]]] = {}
    counts: dict[str, dict[str, int]] = {}
    for noise in noise_levels:
        rel_row: dict[str, Optional[float]] = {}
        cnt_row: dict[str, int] = {}
        for algo in algorithms:
            cell = [r for r in records if r.noise_level == noise and r.label == algo]
            cnt_row[algo] = len(cell)
            if not cell:
                rel_row[algo] = None
                continue
            seeds = sorted({r.seed for r in cell})
            per_seed = []
            for seed in seeds:
                seed_runs = [r for r in cell if r.seed == seed]
                frac = np.mean([1.0 if judged[id(r)] else 0.0 for r in seed_runs])
                per_seed.append(100.0 * float(frac))
            rel_row[algo] = round(float(np.mean(per_seed)), 1)
        reliability[repr(noise)] = rel_row
        counts[repr(noise)] = cnt_row

    zero_noise = [r for r in records if r.noise_level == 0.0]
    areas = profile_area(zero_noise, algorithms, judged) if zero_noise else {}
    return ProfileReport(
        algorithms=algorithms,
        noise_levels=noise_levels,
        areas=areas,
        reliability=reliability,
        counts=counts,
    )


def _run_summary(record: RunRecord, judged: bool) -> dict:
    return {
        "problem": record.problem_name,
        "dim": record.dim,
        "algo": record.label,
        "noise": record.noise_level,
        "seed": record.seed,
        "status": record.status,
        "iterations": record.iterations,
        "eval_f": record.eval_f,
        "eval_g": record.eval_g,
        "final_criticality": (
            None if not math.isfinite(record.final_criticality) else record.final_criticality
        ),
        "judged_success": judged,
        "error": record.error,
    }


def export_report(
    report: ProfileReport,
    records: list[RunRecord],
    path,
    format: str = "json",
) -> None:
    """Write the report as JSON (full detail) or CSV (noise,algo,metric,value)."""
    if format == "json":
        judged = _judgments(records)
        doc = {
            "schema": REPORT_SCHEMA_VERSION,
            "report": {
                "algorithms": report.algorithms,
                "noise_levels": report.noise_levels,
                "areas": report.areas,
                "reliability": report.reliability,
                "counts": report.counts,
            },
            "runs": [_run_summary(r, judged[id(r)]) for r in records],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["noise", "algo", "metric", "value"])
            for algo in report.algorithms:
                area = report.areas.get(algo)
                if area is not None and math.isfinite(area):
                    writer.writerow(["0.0", algo, "area", f"{area:.2f}"])
            for noise in report.noise_levels:
                row = report.reliability[repr(noise)]
                for algo in report.algorithms:
                    value = row.get(algo)
                    cell = "not run" if value is None else f"{value:.1f}"
                    writer.writerow([repr(noise), algo, "reliability", cell])
    else:
        raise ValueError(f"unknown format {format!r}")


def load_report(path) -> ProfileReport:
    """Reconstruct a ProfileReport from its JSON export."""
    with open(path) as fh:
        doc = json.load(fh)
    rep = doc["report"]
    return ProfileReport(
        algorithms=rep["algorithms"],
        noise_levels=rep["noise_levels"],
        areas=rep["areas"],
        reliability=rep["reliability"],
        counts=rep["counts"],
    )
