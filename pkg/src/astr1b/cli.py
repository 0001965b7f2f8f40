"""Command-line interface.

Subcommands:
  solve    run one solver on one registry problem, write a JSONL run record
  bench    run the experiment matrix, write JSON + CSV reports
  theory   verify the complexity bounds on a recorded or freshly made run
  profile  compute performance-profile points and areas from run records

Exit codes: 0 success/converged, 1 error or bound violation, 2 iteration cap
reached, 3 constants unknown, 64 usage error. A config file of key=value
lines supplies defaults; explicit flags take precedence over it.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .bench import (
    DEFAULT_NOISE_LEVELS,
    ExperimentPlan,
    export_report,
    profile_area,
    profile_curves,
    reliability_table,
    run_plan,
)
from .oracle import NoiseSpec
from .problems import DESK_SUITE, UnknownProblemError, UnsupportedDimensionError, registry_get, registry_names
from .solvers import (
    PRESET_NAMES,
    preset,
    record_from_jsonl,
    record_to_jsonl,
    solve,
)
from .theory import (
    UnknownConstantsError,
    check_adagrad_rate,
    check_diminishing_rate,
    theory_params_for,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITER = 2
EXIT_UNKNOWN_CONSTANTS = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse parser exiting with the usage code on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def _resolve(args, key: str, default, cast):
    """Precedence: explicit flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if args.config:
        cfg = _read_config_file(args.config)
        if key in cfg:
            return cast(cfg[key])
    return default


def _solver_config(args, algo: str):
    return preset(
        algo,
        weight_scheme=_resolve(args, "weights", "adagrad", str),
        sigma=_resolve(args, "sigma", 0.01, float),
        theta=_resolve(args, "theta", 1.0, float),
        tau=_resolve(args, "tau", 1.0, float),
        nu=_resolve(args, "nu", 0.1, float),
        mu=_resolve(args, "mu", 0.1, float),
        epsilon=_resolve(args, "eps", 1e-3, float),
        max_iter=_resolve(args, "max_iter", 100_000, int),
    )


def _get_problem(args):
    name = args.problem
    dim = _resolve(args, "dim", None, int)
    if name is None:
        raise UnknownProblemError("no problem given")
    if dim is None:
        dim = dict(DESK_SUITE).get(name)
    if dim is None:
        raise UnsupportedDimensionError(f"--dim required for problem {name!r}")
    return registry_get(name, dim)


def cmd_solve(args) -> int:
    try:
        problem = _get_problem(args)
        config = _solver_config(args, args.algo)
    except (UnknownProblemError, UnsupportedDimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"known problems: {', '.join(registry_names())}", file=sys.stderr)
        return EXIT_USAGE
    if args.dump_config:
        print(json.dumps(asdict(config), sort_keys=True, indent=1))
        return EXIT_OK
    noise = NoiseSpec(
        level=_resolve(args, "noise", 0.0, float), seed=_resolve(args, "seed", 0, int)
    )
    record = solve(problem, config, noise)
    out = args.out or f"run-{problem.name}-{config.label}.jsonl"
    record_to_jsonl(record, out)
    print(f"problem            {problem.name} (n={problem.dim})")
    print(f"algorithm          {config.label}")
    print(f"status             {record.status}")
    print(f"iterations         {record.iterations}")
    print(f"final criticality  {record.final_criticality:.6e}")
    print(f"evaluations        f={record.eval_f} g={record.eval_g}")
    print(f"record             {out}")
    if record.status == "converged":
        return EXIT_OK
    if record.status == "max_iter":
        return EXIT_MAX_ITER
    print(f"error: {record.error}", file=sys.stderr)
    return EXIT_ERROR


def _parse_suite(text: str) -> list[tuple[str, int]]:
    suite = []
    for part in text.split(","):
        name, _, dim = part.partition(":")
        if not dim:
            raise ValueError(f"suite entries must be name:dim, got {part!r}")
        suite.append((name.strip(), int(dim)))
    return suite


def cmd_bench(args) -> int:
    try:
        noise_levels = (
            [float(v) for v in args.noise.split(",")]
            if args.noise is not None
            else list(DEFAULT_NOISE_LEVELS)
        )
        plan = ExperimentPlan(
            suite=_parse_suite(args.suite) if args.suite else list(DESK_SUITE),
            algorithms=args.algos.split(",") if args.algos else list(PRESET_NAMES),
            noise_levels=noise_levels,
            seeds=_resolve(args, "seeds", 10, int),
            base_seed=_resolve(args, "seed", 0, int),
            epsilon=_resolve(args, "eps", 1e-3, float),
            max_iter=_resolve(args, "max_iter", 100_000, int),
            skip_trinf_above=args.skip_trinf_above,
            workers=args.workers,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.dump_config:
        doc = asdict(plan)
        doc["suite"] = [list(entry) for entry in doc["suite"]]
        print(json.dumps(doc, sort_keys=True, indent=1))
        return EXIT_OK

    out_dir = Path(args.out or "bench-out")
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(done, total, record):
        if args.verbose:
            print(
                f"[{done}/{total}] {record.problem_name:<16} {record.label:<8} "
                f"noise={record.noise_level:<5} seed={record.seed} "
                f"{record.status} iters={record.iterations}"
            )

    records = run_plan(plan, progress=progress)
    report = reliability_table(records)
    export_report(report, records, out_dir / "report.json", format="json")
    export_report(report, records, out_dir / "report.csv", format="csv")
    if args.save_runs:
        runs_dir = out_dir / "runs"
        runs_dir.mkdir(exist_ok=True)
        for rec in records:
            fname = (
                f"{rec.problem_name}-{rec.dim}-{rec.label}"
                f"-n{rec.noise_level}-s{rec.seed}.jsonl"
            )
            record_to_jsonl(rec, runs_dir / fname)

    print(f"ran {len(records)} runs over {len(plan.suite)} problems")
    if report.areas:
        print("profile areas (zero noise):")
        for algo in report.algorithms:
            if algo in report.areas:
                print(f"  {algo:<8} {report.areas[algo]:.2f}")
    print("reliability (% solved):")
    header = "  noise   " + "".join(f"{a:>9}" for a in report.algorithms)
    print(header)
    for noise in report.noise_levels:
        row = report.reliability[repr(noise)]
        cells = "".join(
            f"{row[a]:>9.1f}" if row.get(a) is not None else f"{'not run':>9}"
            for a in report.algorithms
        )
        print(f"  {noise:<7} {cells}")
    print(f"reports written to {out_dir}/report.json and {out_dir}/report.csv")
    return EXIT_OK


def cmd_theory(args) -> int:
    if args.record:
        record = record_from_jsonl(args.record)
    else:
        try:
            problem = _get_problem(args)
        except (UnknownProblemError, UnsupportedDimensionError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        config = preset(
            f"astr1b{args.pairs}",
            weight_scheme=_resolve(args, "weights", "adagrad", str),
            sigma=_resolve(args, "sigma", 0.01, float),
            theta=_resolve(args, "theta", 1.0, float),
            tau=_resolve(args, "tau", 1.0, float),
            nu=_resolve(args, "nu", 0.1, float),
            mu=_resolve(args, "mu", 0.1, float),
            epsilon=_resolve(args, "eps", 1e-12, float),
            max_iter=_resolve(args, "max_iter", args.iters, int),
        )
        record = solve(problem, config)
    try:
        problem = registry_get(record.problem_name, record.dim)
        params = theory_params_for(
            problem, record.config, kappa_B=record.kappa_B_max, eta=args.eta
        )
    except (UnknownProblemError, UnknownConstantsError) as exc:
        print(f"error: constants unavailable: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_CONSTANTS

    if record.config.weight_scheme == "adagrad":
        report = check_adagrad_rate(record, params)
    else:
        report = check_diminishing_rate(record, params)

    doc = {
        "problem": record.problem_name,
        "dim": record.dim,
        "label": record.label,
        "weight_scheme": record.config.weight_scheme,
        "params": {k: v for k, v in asdict(params).items()},
        "report": report.to_json_dict(),
    }
    out = args.out or "theory-report.json"
    with open(out, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    status = "ok" if report.ok else f"VIOLATED at k={report.first_violation}"
    print(f"{report.kind} on {record.problem_name}: {status}")
    print(f"checked {report.n_checked} iterations, bound {report.bound:.6e}")
    print(f"report written to {out}")
    return EXIT_OK if report.ok else EXIT_ERROR


def cmd_profile(args) -> int:
    records_dir = Path(args.records)
    files = sorted(records_dir.glob("*.jsonl")) if records_dir.is_dir() else []
    if not files:
        print(f"error: no run records in {records_dir}", file=sys.stderr)
        return EXIT_ERROR
    records = [record_from_jsonl(f) for f in files]
    areas = profile_area(records)
    curves = profile_curves(records)
    out = args.out or "profile.csv"
    with open(out, "w") as fh:
        fh.write("algo,kind,t,value\n")
        for algo in sorted(areas):
            fh.write(f"{algo},area,,{areas[algo]:.6f}\n")
            for t, frac in curves[algo]:
                fh.write(f"{algo},point,{t:.6f},{frac:.6f}\n")
    for algo in sorted(areas):
        print(f"{algo:<8} area {areas[algo]:.4f}")
    print(f"profile written to {out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="astr1b", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p):
        p.add_argument("--config", help="key=value config file with defaults")
        p.add_argument("--eps", type=float, default=None, help="criticality tolerance")
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--sigma", type=float, default=None, help="weight floor constant")
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--tau", type=float, default=None, help="Cauchy decrease fraction")
        p.add_argument("--nu", type=float, default=None)
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)

    p_solve = sub.add_parser("solve", help="run one solver on one problem")
    add_common(p_solve)
    p_solve.add_argument("--problem", required=True)
    p_solve.add_argument("--dim", type=int, default=None)
    p_solve.add_argument("--algo", default="astr1b0", choices=PRESET_NAMES)
    p_solve.add_argument("--weights", choices=("adagrad", "maxchi"), default=None)
    p_solve.add_argument("--noise", type=float, default=None)
    p_solve.add_argument("--dump-config", action="store_true")

    p_bench = sub.add_parser("bench", help="run the experiment matrix")
    add_common(p_bench)
    p_bench.add_argument("--suite", help="comma-separated name:dim entries")
    p_bench.add_argument("--algos", help="comma-separated preset names")
    p_bench.add_argument("--noise", help="comma-separated noise levels")
    p_bench.add_argument("--seeds", type=int, default=None)
    p_bench.add_argument("--skip-trinf-above", type=float, default=0.05,
                         help="skip trinf cells with noise above this level")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--save-runs", action="store_true")
    p_bench.add_argument("--verbose", action="store_true")
    p_bench.add_argument("--dump-config", action="store_true")

    p_theory = sub.add_parser("theory", help="check complexity bounds on a run")
    add_common(p_theory)
    p_theory.add_argument("--record", help="existing JSONL run record")
    p_theory.add_argument("--problem", default=None)
    p_theory.add_argument("--dim", type=int, default=None)
    p_theory.add_argument("--weights", choices=("adagrad", "maxchi"), default=None)
    p_theory.add_argument("--pairs", type=int, default=0, choices=(0, 1, 3))
    p_theory.add_argument("--iters", type=int, default=10_000)
    p_theory.add_argument("--eta", type=float, default=None)

    p_profile = sub.add_parser("profile", help="profile areas from run records")
    p_profile.add_argument("--records", required=True, help="directory of JSONL records")
    p_profile.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "bench": cmd_bench,
        "theory": cmd_theory,
        "profile": cmd_profile,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # surface unexpected failures with exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
