"""Objective-function-free adaptive trust-region methods for bound-constrained
nonconvex minimization, with a function-value trust-region baseline, a noise
robustness benchmark harness, and complexity-bound verification."""

from .bench import (
    ExperimentPlan,
    ProfileReport,
    convergence_judgment,
    export_report,
    load_report,
    profile_area,
    profile_curves,
    reliability_table,
    run_plan,
)
from .criticality import ChiVector, chi, criticality_norm, delta_feasible
from .curvature import SecantMemory, apply_B, operator_norm_bound, secant_push
from .kernels import BACKEND as KERNEL_BACKEND
from .oracle import (
    Bounds,
    EvalCounts,
    InfeasiblePointError,
    NoiseSpec,
    NoiseStream,
    OracleFailureError,
    OracleResult,
    Problem,
    add_noise,
    evaluate,
)
from .problems import (
    DESK_SUITE,
    UnknownProblemError,
    UnsupportedDimensionError,
    desk_suite,
    registry_get,
    registry_names,
)
from .solvers import (
    PRESET_NAMES,
    IterationState,
    RunRecord,
    SolverConfig,
    astr1b_solve,
    preset,
    record_from_jsonl,
    record_to_jsonl,
    solve,
    trinf_solve,
)
from .step import StepBundle, gcp_linear, gcp_quadratic, model_value, radii, refine
from .theory import (
    BoundReport,
    TheoryParams,
    UnknownConstantsError,
    check_adagrad_rate,
    check_diminishing_rate,
    check_series_lemma,
    diminishing_constants,
    kappa_adag,
    lambert_w_minus1,
    stop_iteration_bound,
    theory_params_for,
)
from .weights import WeightState, weight_floor, weights_init, weights_update

__version__ = "0.1.0"
