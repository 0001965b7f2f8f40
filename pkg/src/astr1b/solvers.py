"""Solver drivers: the adaptively scaled OFFO trust-region iteration and the
function-value trust-region baseline.

`astr1b_solve` runs the objective-function-free method: per iteration it
evaluates only the gradient, forms the componentwise criticality measure,
derives trust-region radii from the weight scheme, and takes the (possibly
curvature-refined) generalized Cauchy step. It never requests an objective
value.

`trinf_solve` is the classical trust-region baseline with an l-infinity
region: same step construction with one scalar radius, but steps are
accepted by the achieved/predicted reduction ratio computed from (noisy)
objective values, and the radius expands or contracts accordingly.

Both produce a `RunRecord` that serializes to line-delimited JSON
deterministically (a header object, one object per iteration at full log
level, and a footer).
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .criticality import ChiVector, chi, criticality_norm
from .curvature import SecantMemory, apply_B, operator_norm_bound, secant_push
from .oracle import (
    EvalCounts,
    NoiseSpec,
    NoiseStream,
    OracleFailureError,
    Problem,
    add_noise,
    evaluate,
)
from .step import StepBundle, gcp_linear, gcp_quadratic, model_value, radii, refine
from .weights import weights_init, weights_update

__all__ = [
    "SolverConfig",
    "RunRecord",
    "IterationState",
    "InternalSolverError",
    "preset",
    "PRESET_NAMES",
    "solve",
    "astr1b_solve",
    "trinf_solve",
    "record_to_jsonl",
    "record_from_jsonl",
]

JSON_SCHEMA_VERSION = 1


class InternalSolverError(RuntimeError):
    """Raised when a noiseless run violates a structural guarantee."""


@dataclass
class SolverConfig:
    """Algorithm configuration; defaults follow the reference experiment setup."""

    algorithm: str = "astr1b"  # astr1b | trinf
    weight_scheme: str = "adagrad"  # adagrad | maxchi
    sigma: float = 0.01
    theta: float = 1.0
    nu: float = 0.1
    mu: float = 0.1
    secant_pairs: int = 0
    tau: float = 1.0
    epsilon: float = 1e-3
    max_iter: int = 100_000
    alpha_min: float = 1.0
    eta1: float = 1e-4
    eta2: float = 0.95
    contract: float = 0.5
    expand: float = 2.0
    initial_radius: float = 1.0
    log_level: str = "full"  # full | light

    def __post_init__(self):
        if self.algorithm not in ("astr1b", "trinf"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if not 0.0 < self.alpha_min <= 1.0:
            raise ValueError("alpha_min must lie in (0, 1]")
        if not 0.0 < self.eta1 < self.eta2 < 1.0:
            raise ValueError("need 0 < eta1 < eta2 < 1")
        if not 0.0 < self.contract < 1.0 < self.expand:
            raise ValueError("need 0 < contract < 1 < expand")
        if self.secant_pairs < 0:
            raise ValueError("secant_pairs must be nonnegative")
        if self.log_level not in ("full", "light"):
            raise ValueError("log_level must be 'full' or 'light'")

    @property
    def label(self) -> str:
        return f"{self.algorithm}{self.secant_pairs}"


PRESET_NAMES = ("astr1b0", "astr1b1", "astr1b3", "trinf0", "trinf1", "trinf3")


def preset(name: str, **overrides) -> SolverConfig:
    """One of the six benchmark presets: astr1b{0,1,3} or trinf{0,1,3}."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    algorithm = name[:-1]
    pairs = int(name[-1])
    return SolverConfig(algorithm=algorithm, secant_pairs=pairs, **overrides)


@dataclass
class IterationState:
    """Snapshot handed to an observer after each completed step."""

    k: int
    x: np.ndarray
    g: np.ndarray
    chi_vec: ChiVector
    crit: float
    w: Optional[np.ndarray]
    bundle: Optional[StepBundle]
    x_next: Optional[np.ndarray]
    memory: Optional[SecantMemory]
    f_value: Optional[float] = None
    rho: Optional[float] = None
    radius: Optional[float] = None
    accepted: Optional[bool] = None


@dataclass
class RunRecord:
    """Outcome and iteration history of one solver run."""

    problem_name: str
    dim: int
    label: str
    config: SolverConfig
    noise_level: float
    seed: int
    status: str = "max_iter"  # converged | max_iter | oracle_failure
    iterations: int = 0
    final_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    final_criticality: float = math.inf
    eval_f: int = 0
    eval_g: int = 0
    # running max of the operator-norm bound on B_k (tracked at full log level)
    kappa_B_max: float = 1.0
    wall_time_s: float = 0.0
    log: Optional[dict[str, list]] = None
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"


_ASTR1B_COLUMNS = (
    "crit",
    "chi_sq",
    "w_min",
    "w_max",
    "d_max",
    "gamma",
    "step_norm",
    "model_dec",
    "x_crc",
)
_TRINF_COLUMNS = _ASTR1B_COLUMNS + ("f", "rho", "radius")


def _new_log(columns) -> dict[str, list]:
    return {c: [] for c in columns}


def _crc(x: np.ndarray) -> int:
    return zlib.crc32(x.tobytes())


def _b_operator(memory: Optional[SecantMemory], b_override):
    if b_override is not None:
        return b_override
    if memory is None or len(memory) == 0:
        return None
    return lambda v: apply_B(memory, v)


def solve(
    problem: Problem,
    config: SolverConfig,
    noise: Optional[NoiseSpec] = None,
    observer: Optional[Callable[[IterationState], None]] = None,
    b_override=None,
) -> RunRecord:
    """Dispatch on config.algorithm; record schema is identical for both."""
    if config.algorithm == "astr1b":
        return astr1b_solve(problem, config, noise, observer, b_override)
    if config.algorithm == "trinf":
        return trinf_solve(problem, config, noise, observer, b_override)
    raise ValueError(f"unknown algorithm {config.algorithm!r}")


def _make_record(problem: Problem, config: SolverConfig, noise: Optional[NoiseSpec]) -> RunRecord:
    noise = noise or NoiseSpec()
    return RunRecord(
        problem_name=problem.name,
        dim=problem.dim,
        label=config.label,
        config=config,
        noise_level=noise.level,
        seed=noise.seed,
    )


def astr1b_solve(
    problem: Problem,
    config: SolverConfig,
    noise: Optional[NoiseSpec] = None,
    observer: Optional[Callable[[IterationState], None]] = None,
    b_override=None,
) -> RunRecord:
    """Run the OFFO iteration; the objective value is never requested."""
    if config.algorithm != "astr1b":
        raise ValueError("config.algorithm must be 'astr1b'")
    t0 = time.perf_counter()
    record = _make_record(problem, config, noise)
    full_log = config.log_level == "full"
    log = _new_log(_ASTR1B_COLUMNS) if full_log else None
    record.log = log

    counts = EvalCounts()
    noisy = noise is not None and noise.level > 0.0
    stream_g = NoiseStream(noise.for_stream(1)) if noisy else None

    bounds = problem.bounds
    n = problem.dim
    x = problem.x0.copy()
    wstate = weights_init(
        config.weight_scheme, config.sigma, config.theta, config.nu, config.mu, n
    )
    memory = SecantMemory(config.secant_pairs) if b_override is None else None
    max_inner = 3 * n
    prev_s: Optional[np.ndarray] = None
    prev_g: Optional[np.ndarray] = None

    try:
        for k in range(config.max_iter + 1):
            res = evaluate(problem, x, want_g=True, counts=counts)
            g = add_noise(res, stream_g).gradient if noisy else res.gradient

            if memory is not None and config.secant_pairs > 0 and prev_s is not None:
                secant_push(memory, prev_s, g - prev_g)
                if full_log and len(memory):
                    record.kappa_B_max = max(
                        record.kappa_B_max, operator_norm_bound(memory)
                    )

            chi_vec = chi(x, g, bounds, 1.0)
            crit = criticality_norm(chi_vec)

            if crit <= config.epsilon or k == config.max_iter:
                if full_log:
                    _append_astr1b(log, crit, chi_vec, None, None, math.nan, 0.0, 0.0, x)
                record.status = "converged" if crit <= config.epsilon else "max_iter"
                record.iterations = k
                record.final_criticality = crit
                break

            w = weights_update(wstate, chi_vec, k)
            delta = radii(chi_vec, w)
            s_lin = gcp_linear(x, g, bounds, delta)
            if config.alpha_min != 1.0:
                s_lin *= config.alpha_min
            b_op = _b_operator(memory, b_override)
            gamma, s_quad = gcp_quadratic(s_lin, g, b_op)
            s = refine(x, g, b_op, bounds, delta, s_quad, config.tau, max_inner if b_op else 0)
            x_next = bounds.clip(x + s)
            s_eff = x_next - x
            mdec = -model_value(g, b_op, s_eff)

            if full_log:
                _append_astr1b(log, crit, chi_vec, w, delta, gamma,
                               math.sqrt(float(s_eff @ s_eff)), mdec, x)
            if observer is not None:
                bundle = StepBundle(delta, s_lin, gamma, s_quad, s_eff, mdec)
                observer(IterationState(k, x, g, chi_vec, crit, w, bundle, x_next, memory))

            prev_s, prev_g = s_eff, g
            x = x_next
    except OracleFailureError as exc:
        record.status = "oracle_failure"
        record.error = str(exc)
        record.iterations = max(0, counts.n_g - 1)

    record.final_x = x.copy()
    record.eval_f = counts.n_f
    record.eval_g = counts.n_g
    record.wall_time_s = time.perf_counter() - t0
    return record


def _append_astr1b(log, crit, chi_vec, w, delta, gamma, step_norm, mdec, x):
    v = chi_vec.values
    log["crit"].append(crit)
    log["chi_sq"].append(float(v @ v))
    log["w_min"].append(float(np.min(w)) if w is not None else math.nan)
    log["w_max"].append(float(np.max(w)) if w is not None else math.nan)
    log["d_max"].append(float(np.max(delta)) if delta is not None else math.nan)
    log["gamma"].append(gamma)
    log["step_norm"].append(step_norm)
    log["model_dec"].append(mdec)
    log["x_crc"].append(_crc(x))


def trinf_solve(
    problem: Problem,
    config: SolverConfig,
    noise: Optional[NoiseSpec] = None,
    observer: Optional[Callable[[IterationState], None]] = None,
    b_override=None,
) -> RunRecord:
    """Classical l-infinity trust region with ratio-based acceptance."""
    if config.algorithm != "trinf":
        raise ValueError("config.algorithm must be 'trinf'")
    t0 = time.perf_counter()
    record = _make_record(problem, config, noise)
    full_log = config.log_level == "full"
    log = _new_log(_TRINF_COLUMNS) if full_log else None
    record.log = log

    counts = EvalCounts()
    noisy = noise is not None and noise.level > 0.0
    stream_f = NoiseStream(noise.for_stream(0)) if noisy else None
    stream_g = NoiseStream(noise.for_stream(1)) if noisy else None

    def eval_f(pt: np.ndarray) -> float:
        res = evaluate(problem, pt, want_f=True, counts=counts)
        if noisy:
            res = add_noise(res, stream_f)
        return res.f_value

    def eval_g(pt: np.ndarray) -> np.ndarray:
        res = evaluate(problem, pt, want_g=True, counts=counts)
        if noisy:
            res = add_noise(res, stream_g)
        return res.gradient

    bounds = problem.bounds
    n = problem.dim
    x = problem.x0.copy()
    radius = config.initial_radius
    memory = SecantMemory(config.secant_pairs) if b_override is None else None
    max_inner = 3 * n
    pending: Optional[tuple[np.ndarray, np.ndarray]] = None

    try:
        f_cur = eval_f(x)
        for k in range(config.max_iter + 1):
            g = eval_g(x)

            if memory is not None and config.secant_pairs > 0 and pending is not None:
                secant_push(memory, pending[0], g - pending[1])
                if full_log and len(memory):
                    record.kappa_B_max = max(
                        record.kappa_B_max, operator_norm_bound(memory)
                    )
                pending = None

            chi_vec = chi(x, g, bounds, 1.0)
            crit = criticality_norm(chi_vec)

            if crit <= config.epsilon or k == config.max_iter:
                if full_log:
                    _append_trinf(log, crit, chi_vec, math.nan, 0.0, 0.0, x,
                                  f_cur, math.nan, radius)
                record.status = "converged" if crit <= config.epsilon else "max_iter"
                record.iterations = k
                record.final_criticality = crit
                break

            s_lin = gcp_linear(x, g, bounds, radius)
            b_op = _b_operator(memory, b_override)
            gamma, s_quad = gcp_quadratic(s_lin, g, b_op)
            s = refine(x, g, b_op, bounds, radius, s_quad, config.tau,
                       max_inner if b_op else 0)
            x_trial = bounds.clip(x + s)
            s_eff = x_trial - x
            pred = -model_value(g, b_op, s_eff)

            if pred <= 0.0:
                if not noisy:
                    raise InternalSolverError(
                        "nonpositive predicted decrease on a noiseless run"
                    )
                rho = -math.inf
                accepted = False
            else:
                f_trial = eval_f(x_trial)
                rho = (f_cur - f_trial) / pred
                accepted = rho >= config.eta1

            if full_log:
                _append_trinf(log, crit, chi_vec, gamma,
                              math.sqrt(float(s_eff @ s_eff)) if accepted else 0.0,
                              pred, x, f_cur, rho, radius)
            if observer is not None:
                bundle = StepBundle(np.full(n, radius), s_lin, gamma, s_quad, s_eff, pred)
                observer(IterationState(k, x, g, chi_vec, crit, None, bundle,
                                        x_trial if accepted else x, memory,
                                        f_value=f_cur, rho=rho, radius=radius,
                                        accepted=accepted))

            if accepted:
                if memory is not None and config.secant_pairs > 0:
                    pending = (s_eff, g)
                x = x_trial
                f_cur = f_trial

            if rho >= config.eta2:
                radius *= config.expand
            elif rho < config.eta1:
                radius *= config.contract
    except OracleFailureError as exc:
        record.status = "oracle_failure"
        record.error = str(exc)
        record.iterations = max(0, counts.n_g - 1)

    record.final_x = x.copy()
    record.eval_f = counts.n_f
    record.eval_g = counts.n_g
    record.wall_time_s = time.perf_counter() - t0
    return record


def _append_trinf(log, crit, chi_vec, gamma, step_norm, pred, x, f_cur, rho, radius):
    v = chi_vec.values
    log["crit"].append(crit)
    log["chi_sq"].append(float(v @ v))
    log["w_min"].append(math.nan)
    log["w_max"].append(math.nan)
    log["d_max"].append(radius)
    log["gamma"].append(gamma)
    log["step_norm"].append(step_norm)
    log["model_dec"].append(pred)
    log["x_crc"].append(_crc(x))
    log["f"].append(f_cur)
    log["rho"].append(rho)
    log["radius"].append(radius)


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"not JSON-serializable: {type(value)}")


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def record_to_jsonl(record: RunRecord, path) -> None:
    """Write the run as header / per-iteration lines / footer.

    All content is a pure function of problem, config and seed, so repeated
    runs produce bitwise-identical files (wall time is deliberately not
    serialized).
    """
    def dumps(obj) -> str:
        return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)

    with open(path, "w") as fh:
        header = {
            "type": "header",
            "schema": JSON_SCHEMA_VERSION,
            "problem": record.problem_name,
            "dim": record.dim,
            "label": record.label,
            "noise_level": record.noise_level,
            "seed": record.seed,
            "config": asdict(record.config),
        }
        fh.write(dumps(header) + "\n")
        if record.log is not None:
            columns = list(record.log)
            length = len(record.log["crit"])
            for i in range(length):
                row = {"type": "iter", "k": i}
                for c in columns:
                    row[c] = _jsonable(record.log[c][i])
                fh.write(dumps(row) + "\n")
        footer = {
            "type": "footer",
            "status": record.status,
            "iterations": record.iterations,
            "eval_f": record.eval_f,
            "eval_g": record.eval_g,
            "kappa_B_max": record.kappa_B_max,
            "final_criticality": _jsonable(record.final_criticality),
            "final_x": record.final_x,
            "error": record.error,
        }
        fh.write(dumps(footer) + "\n")


def record_from_jsonl(path) -> RunRecord:
    """Reconstruct a RunRecord written by `record_to_jsonl`."""
    header = None
    footer = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj["type"] == "header":
                header = obj
            elif obj["type"] == "iter":
                rows.append(obj)
            elif obj["type"] == "footer":
                footer = obj
    if header is None or footer is None:
        raise ValueError(f"incomplete run record in {path}")
    config = SolverConfig(**header["config"])
    record = RunRecord(
        problem_name=header["problem"],
        dim=header["dim"],
        label=header["label"],
        config=config,
        noise_level=header["noise_level"],
        seed=header["seed"],
        status=footer["status"],
        iterations=footer["iterations"],
        final_x=np.array(footer["final_x"], dtype=float),
        final_criticality=(
            math.inf if footer["final_criticality"] is None else footer["final_criticality"]
        ),
        eval_f=footer["eval_f"],
        eval_g=footer["eval_g"],
        kappa_B_max=footer.get("kappa_B_max", 1.0),
        error=footer.get("error"),
    )
    if rows:
        columns = [c for c in rows[0] if c not in ("type", "k")]
        log = {c: [] for c in columns}
        for row in rows:
            for c in columns:
                v = row[c]
                log[c].append(math.nan if v is None else v)
        record.log = log
    else:
        record.log = None
    return record
